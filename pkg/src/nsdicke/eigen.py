"""Eigenvalues of small dense real matrices.

Balancing, Householder reduction to upper Hessenberg form and the Francis
implicit double-shift QR iteration. Written for the 8x8 Jacobians of the
mean-field model, where plain Python on nested lists beats the call overhead
of array libraries; it works for any square real matrix.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import EigenConvergenceError

MAX_ITS_PER_EIGENVALUE = 100
_RADIX = 2.0


def balance(a: np.ndarray) -> None:
    """Diagonal similarity scaling (powers of two) to even out row/column norms, in place."""
    n = a.shape[0]
    done = False
    while not done:
        done = True
        for i in range(n):
            d = abs(a[i, i])
            c = float(np.abs(a[:, i]).sum()) - d
            r = float(np.abs(a[i]).sum()) - d
            if c == 0.0 or r == 0.0:
                continue
            g = r / _RADIX
            f = 1.0
            s = c + r
            while c < g:
                f *= _RADIX
                c *= _RADIX * _RADIX
            g = r * _RADIX
            while c > g:
                f /= _RADIX
                c /= _RADIX * _RADIX
            if (c + r) / f < 0.95 * s:
                done = False
                a[i, :] /= f
                a[:, i] *= f


def hessenberg(a: np.ndarray) -> None:
    """Householder reduction to upper Hessenberg form, in place."""
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1:, k]
        peak = float(np.abs(x).max())
        if peak == 0.0:
            continue
        # reflector built from x / peak; it is invariant under that scaling
        v = x / peak
        alpha = float(np.sqrt(v @ v))
        if v[0] > 0:
            alpha = -alpha
        v[0] -= alpha
        beta = 2.0 / float(v @ v)
        alpha *= peak
        a[k + 1:, k:] -= np.outer(beta * v, v @ a[k + 1:, k:])
        a[:, k + 1:] -= np.outer(a[:, k + 1:] @ v, beta * v)
        a[k + 1, k] = alpha
        a[k + 2:, k] = 0.0


_EPS = float(np.finfo(float).eps)


def _hqr(h: list[list[float]]) -> list[complex]:
    """Eigenvalues of an upper Hessenberg matrix (destroys ``h``).

    Indices below run 1..n to keep the deflation bookkeeping readable; ``h``
    is padded accordingly by the caller.
    """
    n = len(h) - 1
    wr = [0.0] * (n + 1)
    wi = [0.0] * (n + 1)
    found = [False] * (n + 1)
    anorm = 0.0
    for i in range(1, n + 1):
        for j in range(max(i - 1, 1), n + 1):
            anorm += abs(h[i][j])
    nn = n
    t = 0.0
    x = y = z = p = q = r = s = w = 0.0
    while nn >= 1:
        its = 0
        while True:
            l = nn
            while l >= 2:
                s = abs(h[l - 1][l - 1]) + abs(h[l][l])
                if s == 0.0:
                    s = anorm
                # relative test, plus an absolute one at roundoff of the whole matrix
                if abs(h[l][l - 1]) + s == s or abs(h[l][l - 1]) <= _EPS * anorm:
                    h[l][l - 1] = 0.0
                    break
                l -= 1
            x = h[nn][nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                found[nn] = True
                nn -= 1
                break
            y = h[nn - 1][nn - 1]
            w = h[nn][nn - 1] * h[nn - 1][nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = math.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z:
                        wr[nn] = x - w / z
                    wi[nn - 1] = wi[nn] = 0.0
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn] = z
                    wi[nn - 1] = -z
                found[nn] = found[nn - 1] = True
                nn -= 2
                break
            if its == MAX_ITS_PER_EIGENVALUE:
                partial = [complex(wr[i], wi[i]) for i in range(1, n + 1) if found[i]]
                raise EigenConvergenceError(
                    f"QR iteration did not converge after {its} iterations "
                    f"({len(partial)} of {n} eigenvalues found)", partial)
            if its and its % 10 == 0:
                # exceptional shift, as in LAPACK's dhseqr every 10 sweeps
                t += x
                for i in range(1, nn + 1):
                    h[i][i] -= x
                s = abs(h[nn][nn - 1]) + abs(h[nn - 1][nn - 2])
                y = x = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            m = nn - 2
            while m >= l:
                z = h[m][m]
                r = x - z
                s = y - z
                p = (r * s - w) / h[m + 1][m] + h[m][m + 1]
                q = h[m + 1][m + 1] - z - r - s
                r = h[m + 2][m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(h[m][m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(h[m - 1][m - 1]) + abs(z) + abs(h[m + 1][m + 1]))
                if u + v == v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                h[i][i - 2] = 0.0
                if i != m + 2:
                    h[i][i - 3] = 0.0
            k = m
            while k <= nn - 1:
                if k != m:
                    p = h[k][k - 1]
                    q = h[k + 1][k - 1]
                    r = h[k + 2][k - 1] if k != nn - 1 else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                if s != 0.0:
                    if k == m:
                        if l != m:
                            h[k][k - 1] = -h[k][k - 1]
                    else:
                        h[k][k - 1] = -s * x
                    p += s
                    x = p / s
                    y = q / s
                    z = r / s
                    q /= p
                    r /= p
                    rk, rk1 = h[k], h[k + 1]
                    if k != nn - 1:
                        rk2 = h[k + 2]
                        for j in range(k, nn + 1):
                            pp = rk[j] + q * rk1[j] + r * rk2[j]
                            rk2[j] -= pp * z
                            rk1[j] -= pp * y
                            rk[j] -= pp * x
                    else:
                        for j in range(k, nn + 1):
                            pp = rk[j] + q * rk1[j]
                            rk1[j] -= pp * y
                            rk[j] -= pp * x
                    mmin = nn if nn < k + 3 else k + 3
                    for i in range(l, mmin + 1):
                        row = h[i]
                        pp = x * row[k] + y * row[k + 1]
                        if k != nn - 1:
                            pp += z * row[k + 2]
                            row[k + 2] -= pp * r
                        row[k + 1] -= pp * q
                        row[k] -= pp
                k += 1
    return [complex(wr[i], wi[i]) for i in range(1, n + 1)]


def eigenvalues(matrix) -> list[complex]:
    """All eigenvalues of a real square matrix.

    Complex eigenvalues come out as exact conjugate pairs. Raises
    :class:`EigenConvergenceError` (with the eigenvalues found so far) when
    the iteration cap is hit.
    """
    arr = np.asarray(matrix, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("eigenvalues() needs a square matrix")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    n = arr.shape[0]
    if n == 0:
        return []
    # power-of-two rescaling keeps tiny or huge inputs away from under/overflow
    peak = float(np.abs(arr).max())
    if peak == 0.0:
        return [0j] * n
    scale = 2.0 ** math.frexp(peak)[1]
    a = arr / scale
    balance(a)
    hessenberg(a)
    padded = [[0.0] * (n + 1)] + [[0.0] + row for row in a.tolist()]
    try:
        values = _hqr(padded)
    except EigenConvergenceError as exc:
        raise EigenConvergenceError(str(exc), [z * scale for z in exc.partial]) from None
    return [z * scale for z in values]


def sort_eigenvalues(values) -> list[complex]:
    """Descending real part, then descending imaginary part."""
    return sorted(values, key=lambda z: (-z.real, -z.imag))
