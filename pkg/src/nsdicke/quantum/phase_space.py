"""States, reduced field and Husimi Q readout."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.special import gammaln

from ..errors import ParameterError
from .operators import HilbertSpec


def coherent_spin_state(j: float, theta: float, phi: float) -> np.ndarray:
    """SU(2) coherent state |theta, phi> in the descending-m basis.

    <S> = j (sin t cos p, sin t sin p, cos t).
    """
    two_j = round(2 * j)
    if two_j < 0 or abs(two_j - 2 * j) > 1e-12:
        raise ParameterError(f"spin must be a non-negative half-integer, got {j}")
    k = np.arange(two_j + 1)  # k = j - m
    m = j - k
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    binom = np.exp(gammaln(two_j + 1) - gammaln(k + 1) - gammaln(two_j - k + 1))
    # float powers give 0**0 = 1, so the poles need no special case
    amp = np.sqrt(binom) * np.power(c, (two_j - k).astype(float)) * np.power(s, k.astype(float))
    vec = amp * np.exp(-1j * m * phi)
    return vec / np.linalg.norm(vec)


def fock_state(n_max: int, n: int) -> np.ndarray:
    if not 0 <= n <= n_max:
        raise ParameterError(f"Fock level {n} outside 0..{n_max}")
    v = np.zeros(n_max + 1, dtype=complex)
    v[n] = 1
    return v


def coherent_field_state(n_max: int, alpha: complex) -> np.ndarray:
    """Truncated |alpha> (renormalized after truncation)."""
    return _coherent_coefficients(np.asarray(alpha, dtype=complex), n_max + 1) \
        / math.sqrt(_coherent_norm2(alpha, n_max))


def _coherent_norm2(alpha, n_max):
    c = _coherent_coefficients(np.asarray(alpha, dtype=complex), n_max + 1)
    return float(np.sum(np.abs(c) ** 2))


def _coherent_coefficients(alpha: np.ndarray, n_fock: int) -> np.ndarray:
    """e^{-|alpha|^2/2} alpha^n / sqrt(n!) for n < n_fock, along a new last axis."""
    n = np.arange(n_fock)
    r = np.abs(alpha)[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        logmag = -0.5 * r ** 2 + n * np.log(r) - 0.5 * gammaln(n + 1)
    logmag = np.where((r == 0) & (n == 0), 0.0, logmag)
    return np.exp(logmag + 1j * n * np.angle(alpha)[..., None])


def product_state(spec: HilbertSpec, field: np.ndarray, spin1: np.ndarray,
                  spin2: np.ndarray) -> np.ndarray:
    """Density matrix |f, s1, s2><f, s1, s2| in Fock x spin1 x spin2 order."""
    psi = np.kron(np.kron(field, spin1), spin2)
    if psi.size != spec.dim:
        raise ParameterError("factor dimensions do not match the Hilbert spec")
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def partial_trace_field(rho: np.ndarray, spec: HilbertSpec) -> np.ndarray:
    F, S = spec.n_fock, spec.n_spin
    return np.trace(np.asarray(rho).reshape(F, S, F, S), axis1=1, axis2=3)


def husimi_q(rho_field: np.ndarray, alpha_grid) -> np.ndarray:
    """Q(alpha) = <alpha| rho |alpha> / pi on any array of complex points."""
    rho_field = np.asarray(rho_field)
    alpha = np.asarray(alpha_grid, dtype=complex)
    c = _coherent_coefficients(alpha, rho_field.shape[0])
    q = np.einsum("...n,nm,...m->...", c.conj(), rho_field, c).real / math.pi
    return q


def default_extent(rho_field: np.ndarray) -> float:
    nbar = float(np.real(np.sum(np.diag(rho_field) * np.arange(rho_field.shape[0]))))
    return 3 + 3 * math.sqrt(max(nbar, 0.0))


@dataclass(frozen=True)
class QGrid:
    re_axis: np.ndarray
    im_axis: np.ndarray
    q: np.ndarray  # q[i_im, i_re]

    @property
    def spacing(self) -> float:
        return float(max(self.re_axis[1] - self.re_axis[0], self.im_axis[1] - self.im_axis[0]))

    def normalization(self) -> float:
        """Riemann sum of Q over the grid."""
        d_re = self.re_axis[1] - self.re_axis[0]
        d_im = self.im_axis[1] - self.im_axis[0]
        return float(self.q.sum() * d_re * d_im)

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("re_alpha,im_alpha,q\n")
            for i, y in enumerate(self.im_axis):
                for k, x in enumerate(self.re_axis):
                    fh.write(f"{x!r},{y!r},{self.q[i, k]!r}\n")

    def write_matrix(self, path) -> None:
        """gnuplot ``matrix nonuniform`` layout: first row/column hold the axes."""
        with open(path, "w") as fh:
            fh.write(" ".join([str(len(self.re_axis))] + [repr(float(x)) for x in self.re_axis]))
            fh.write("\n")
            for i, y in enumerate(self.im_axis):
                fh.write(" ".join([repr(float(y))] + [repr(float(v)) for v in self.q[i]]))
                fh.write("\n")


def q_grid(rho_field: np.ndarray, extent: float | None = None, points: int = 101) -> QGrid:
    """Q on the square |Re a|, |Im a| <= extent (default 3 + 3 sqrt(<n>))."""
    if points < 3:
        raise ParameterError("need at least 3 grid points per axis")
    if extent is None:
        extent = default_extent(rho_field)
    axis = np.linspace(-extent, extent, points)
    alpha = axis[None, :] + 1j * axis[:, None]
    return QGrid(axis, axis.copy(), husimi_q(rho_field, alpha))


@dataclass(frozen=True)
class LobeReport:
    count: int
    centroids: tuple[complex, ...]
    threshold_fraction: float

    def to_dict(self) -> dict:
        return {"count": self.count, "threshold_fraction": self.threshold_fraction,
                "centroids": [[c.real, c.imag] for c in self.centroids]}


def count_q_lobes(grid: QGrid, threshold_fraction: float = 0.5) -> LobeReport:
    """Connected regions (4-neighbour) where Q exceeds a fraction of its maximum.

    Centroids are Q-weighted, in alpha coordinates.
    """
    if not 0 < threshold_fraction < 1:
        raise ParameterError("threshold_fraction must lie in (0, 1)")
    q = grid.q
    mask = q > threshold_fraction * q.max()
    # the default structuring element in 2D is the 4-neighbour cross
    labels, count = ndimage.label(mask)
    centres = ndimage.center_of_mass(q, labels, range(1, count + 1))
    d_re = grid.re_axis[1] - grid.re_axis[0]
    d_im = grid.im_axis[1] - grid.im_axis[0]
    cents = tuple(complex(grid.re_axis[0] + ck * d_re, grid.im_axis[0] + ci * d_im)
                  for ci, ck in centres)
    return LobeReport(int(count), cents, threshold_fraction)


def parity_paired(centroids, tol: float) -> bool:
    """True when the centroids split into pairs (c, -c) within ``tol``."""
    left = list(centroids)
    if len(left) % 2:
        return False
    while left:
        c = left.pop(0)
        dists = [abs(c + d) for d in left]
        if not dists:
            return False
        k = int(np.argmin(dists))
        if dists[k] > tol:
            return False
        left.pop(k)
    return True


__all__ = [
    "coherent_spin_state", "fock_state", "coherent_field_state", "product_state",
    "partial_trace_field", "husimi_q", "q_grid", "QGrid", "count_q_lobes", "LobeReport",
    "parity_paired", "default_extent",
]
