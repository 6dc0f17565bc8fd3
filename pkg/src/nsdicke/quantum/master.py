"""Lindblad evolution of the full quantum model.

    drho/dt = i[rho, H] + kappa (2 a rho a^dag - a^dag a rho - rho a^dag a)

:func:`lindblad_rhs` is the literal matrix form and serves as the reference.
Time stepping uses :class:`LindbladKernel`, which views rho as a tensor
rho[n, s, m, t] (photon n, m; joint spin s, t). In that basis everything
except the coupling lam (a + a^dag)(S1x - S2x) is diagonal or a shift, and
the coupling costs one small matmul per step.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..core import ModelParams
from ..errors import AccuracyError, ParameterError, TruncationWarning
from .operators import HilbertSpec, OperatorSet, build_operators

OBSERVABLE_COLUMNS = ("t", "re_exp_a", "im_exp_a", "n_phot", "s1x", "s1y", "s1z",
                      "s2x", "s2y", "s2z", "s_z_total", "dsx")

TRACE_DRIFT_LIMIT = 1e-6
TRUNCATION_LIMIT = 1e-6


def hamiltonian(params: ModelParams, ops: OperatorSet):
    """Sparse Hermitian H = wc a^dag a + wa (S1z + S2z) + lam (a^dag + a)(S1x - S2x)."""
    x = ops.a + ops.a_dag
    h = (params.omega_c * ops.n_op + params.omega_a * (ops.s1z + ops.s2z)
         + params.lam * (x @ (ops.s1x - ops.s2x)))
    return h.tocsr()


def lindblad_rhs(rho: np.ndarray, H, ops: OperatorSet, kappa: float) -> np.ndarray:
    rho = np.asarray(rho)
    a, ad, n = ops.a, ops.a_dag, ops.n_op
    comm = 1j * ((H.T @ rho.T).T - H @ rho)
    a_rho = a @ rho
    jump = (ad.T @ a_rho.T).T  # a rho a^dag
    n_rho = n @ rho
    return comm + kappa * (2 * jump - n_rho - (n.T @ rho.T).T)


class LindbladKernel:
    """Structured Lindblad right-hand side on rho[n, s, m, t] tensors.

    Assumes a Hermitian argument: the coupling commutator is formed as
    T + T^dag with T = -i lam V rho.
    """

    def __init__(self, params: ModelParams, ops: OperatorSet):
        spec = ops.spec
        self.spec, self.ops, self.params = spec, ops, params
        F, S = spec.n_fock, spec.n_spin
        self.shape = (F, S, F, S)
        n = np.arange(F, dtype=float)
        sz = np.diag(ops.spin_s1z + ops.spin_s2z)
        E = params.omega_c * n[:, None] + params.omega_a * sz[None, :]
        N = np.broadcast_to(n[:, None], (F, S))
        k = params.kappa
        self.free = (1j * (E[None, None, :, :] - E[:, :, None, None])
                     - k * (N[:, :, None, None] + N[None, None, :, :]))
        root = np.sqrt(np.arange(1, F, dtype=float))
        self.jump = (2 * k * np.outer(root, root))[:, None, :, None]
        self.root = root[:, None, None, None]
        self.coupling = (-1j * params.lam) * (ops.spin_s1x - ops.spin_s2x)

    def __call__(self, r: np.ndarray) -> np.ndarray:
        F, S = self.spec.n_fock, self.spec.n_spin
        out = self.free * r
        out[:-1, :, :-1, :] += self.jump * r[1:, :, 1:, :]
        if self.params.lam != 0:
            # (a + a^dag) on the left photon index
            x = np.zeros_like(r)
            x[:-1] += self.root * r[1:]
            x[1:] += self.root * r[:-1]
            t = np.matmul(self.coupling, x.reshape(F, S, F * S)).reshape(self.shape)
            out += t
            out += t.conj().transpose(2, 3, 0, 1)
        return out

    def to_tensor(self, rho: np.ndarray) -> np.ndarray:
        return np.asarray(rho, dtype=complex).reshape(self.shape).copy()

    def to_matrix(self, r: np.ndarray) -> np.ndarray:
        D = self.spec.dim
        return r.reshape(D, D)


def rk4_step(f, r: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(r)
    k2 = f(r + (0.5 * dt) * k1)
    acc = k1
    acc += 2 * k2
    k3 = f(r + (0.5 * dt) * k2)
    acc += 2 * k3
    k4 = f(r + dt * k3)
    acc += k4
    return r + (dt / 6.0) * acc


def guideline_dt(params: ModelParams, spec: HilbertSpec) -> float:
    """Conservative RK4 step 0.01 / max(wc, wa, lam sqrt(N1 n_max))."""
    scale = max(params.omega_c, params.omega_a, params.lam * math.sqrt(spec.n1 * spec.n_max),
                params.kappa, 1e-300)
    return 0.01 / scale


def liouvillian_bound(params: ModelParams, spec: HilbertSpec) -> float:
    """Norm bound on the Lindbladian: free spread + decay + 2 ||V||."""
    nm = spec.n_max
    return (params.omega_c * nm + params.omega_a * (spec.n1 + spec.n2)
            + 2 * params.kappa * nm + 4 * params.lam * math.sqrt(nm) * (spec.j1 + spec.j2))


def default_dt(params: ModelParams, spec: HilbertSpec) -> float:
    """2 / (Lindbladian bound), capped at 0.02.

    RK4 stays stable up to |z| ~ 2.8 on both axes, and at the N1 = 4, N2 = 3
    scale step halving from this choice moves observables by < 1e-7.
    """
    bound = liouvillian_bound(params, spec)
    return min(0.02, 2.0 / bound) if bound > 0 else 0.02


def default_n_max(params: ModelParams, n1: int, n2: int) -> int:
    """ceil(4 max(1, |a_ss|^2)) + 6 with |a_ss| from the largest mean-field branch."""
    from ..steadystate import all_fixed_points

    p = params.replace(n1=float(n1), n2=float(n2))
    nphot = 0.0
    if p.omega_a > 0:
        nphot = max((abs(r.state.a) ** 2 for r in all_fixed_points(p) if r.exists), default=0.0)
    return int(math.ceil(4 * max(1.0, nphot))) + 6


@dataclass
class ObservableSeries:
    times: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        i = OBSERVABLE_COLUMNS.index(name)
        if name == "t":
            return np.array(self.times)
        return np.array([row[i - 1] for row in self.rows])

    def as_array(self) -> np.ndarray:
        return np.column_stack([np.array(self.times), np.array(self.rows)])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(OBSERVABLE_COLUMNS)
            for row in self.as_array():
                w.writerow([repr(float(v)) for v in row])


@dataclass
class MasterResult:
    rho: np.ndarray
    series: ObservableSeries
    dt: float
    n_steps: int
    diagnostics: dict


class _Readout:
    """Expectation values from the reduced photon and spin matrices."""

    def __init__(self, ops: OperatorSet):
        self.ops = ops
        spec = ops.spec
        self.a = ops.a_fock
        self.n = np.diag(np.arange(spec.n_fock, dtype=float))
        self.spin = (ops.spin_s1x, ops.spin_s1y, ops.spin_s1z,
                     ops.spin_s2x, ops.spin_s2y, ops.spin_s2z)
        self.sq = []
        for z, p, m in ((ops.spin_s1z, ops.spin_s1p, ops.spin_s1m),
                        (ops.spin_s2z, ops.spin_s2p, ops.spin_s2m)):
            self.sq.append(z @ z + 0.5 * (p @ m + m @ p))

    @staticmethod
    def _exp(op, red):
        return complex(np.sum(op * red.T))

    def reduced(self, r):
        return np.trace(r, axis1=1, axis2=3), np.trace(r, axis1=0, axis2=2)

    def row(self, r):
        rf, rs = self.reduced(r)
        ea = self._exp(self.a, rf)
        nph = self._exp(self.n, rf).real
        s = [self._exp(o, rs).real for o in self.spin]
        return [ea.real, ea.imag, nph, *s, s[2] + s[5], s[0] - s[3]]

    def spin_squares(self, r):
        rs = np.trace(r, axis1=0, axis2=2)
        return [self._exp(q, rs).real for q in self.sq]


def _validate_density(rho: np.ndarray, dim: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dim, dim):
        raise ParameterError(f"density matrix must be {dim}x{dim}, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
        raise ParameterError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > 1e-8:
        raise ParameterError("density matrix must have unit trace")
    return rho


def evolve_master(rho0: np.ndarray, params: ModelParams, spec: HilbertSpec,
                  t_final: float, dt: float | None = None, n_samples: int = 201,
                  ops: OperatorSet | None = None, truncation: str = "warn",
                  progress=None) -> MasterResult:
    """Fixed-step RK4 integration of the master equation.

    The step is shrunk so that an integer number of steps lands on
    ``t_final``; observables are recorded at ``n_samples`` (approximately)
    equispaced step boundaries. ``truncation`` is "warn", "error" or
    "ignore" and governs what happens when the top Fock level holds more
    than 1e-6 population.
    """
    if truncation not in ("warn", "error", "ignore"):
        raise ParameterError("truncation must be 'warn', 'error' or 'ignore'")
    if not t_final > 0:
        raise ParameterError("t_final must be > 0")
    if dt is None:
        dt = default_dt(params, spec)
    if not dt > 0:
        raise ParameterError("dt must be > 0")
    ops = ops or build_operators(spec)
    rho0 = _validate_density(rho0, spec.dim)
    n_steps = max(1, int(math.ceil(t_final / dt - 1e-9)))
    dt = t_final / n_steps
    n_samples = max(2, min(n_samples, n_steps + 1))
    sample_steps = sorted(set(np.round(np.linspace(0, n_steps, n_samples)).astype(int)))

    kernel = LindbladKernel(params, ops)
    readout = _Readout(ops)
    r = kernel.to_tensor(rho0)
    trace0 = float(np.trace(rho0).real)
    sq0 = readout.spin_squares(r)
    series = ObservableSeries()
    diag = dict(max_trace_drift=0.0, max_hermiticity=0.0, spin_sq_drift=0.0,
                top_population=0.0)

    def record(step):
        mat = kernel.to_matrix(r)
        drift = abs(np.trace(mat).real - trace0)
        herm = float(np.max(np.abs(mat - mat.conj().T)))
        sq = readout.spin_squares(r)
        sq_drift = max((abs(x - x0) / abs(x0) if x0 else abs(x))
                       for x, x0 in zip(sq, sq0))
        rf = np.trace(r, axis1=1, axis2=3)
        diag["max_trace_drift"] = max(diag["max_trace_drift"], drift)
        diag["max_hermiticity"] = max(diag["max_hermiticity"], herm)
        diag["spin_sq_drift"] = max(diag["spin_sq_drift"], sq_drift)
        diag["top_population"] = max(diag["top_population"], float(rf[-1, -1].real))
        if drift > TRACE_DRIFT_LIMIT:
            raise AccuracyError(f"trace drift {drift:.3g} at t={step * dt:.4g}; "
                                f"use a smaller dt (now {dt:.3g})")
        series.times.append(step * dt)
        series.rows.append(readout.row(r))

    next_sample = iter(sample_steps)
    target = next(next_sample)
    for step in range(n_steps + 1):
        if step == target:
            record(step)
            target = next(next_sample, None)
        if step == n_steps:
            break
        r = rk4_step(kernel, r, dt)
        if not np.isfinite(r[0, 0, 0, 0]):
            raise AccuracyError(f"non-finite density matrix at t={(step + 1) * dt:.4g}; "
                                f"dt={dt:.3g} is beyond the RK4 stability limit")
        if progress is not None:
            progress(step + 1, n_steps)

    rho = kernel.to_matrix(r).copy()
    diag["min_eigenvalue"] = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
    if diag["top_population"] > TRUNCATION_LIMIT and truncation != "ignore":
        msg = (f"population {diag['top_population']:.3g} in the top Fock level "
               f"n={spec.n_max}; increase n_max")
        if truncation == "error":
            raise AccuracyError(msg)
        warnings.warn(msg, TruncationWarning, stacklevel=2)
    return MasterResult(rho, series, dt, n_steps, diag)


__all__ = [
    "hamiltonian", "lindblad_rhs", "LindbladKernel", "rk4_step", "evolve_master",
    "guideline_dt", "default_dt", "liouvillian_bound", "default_n_max", "MasterResult",
    "ObservableSeries", "OBSERVABLE_COLUMNS",
]
