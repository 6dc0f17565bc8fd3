"""Time evolution of the mean-field equations and attractor classification.

Integration is delegated to scipy's embedded Runge-Kutta pairs (DOP853 by
default, RK45 available) with dense output at the requested sample times.
Spin lengths are conserved exactly by the equations of motion; they are
monitored, never re-projected, so a drift is a genuine accuracy signal.
"""

from __future__ import annotations

import csv
import dataclasses
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .core import PARITY_DIAG, MeanFieldState, ModelParams, energy_vector, rhs_vector
from .errors import AccuracyError, ParameterError, StiffnessError
from .stability import Verdict, classify_stability
from .steadystate import FixedPointRecord, PhaseLabel, all_fixed_points, by_label

DEFAULT_DELTA_A = 1e-3

TRAJECTORY_COLUMNS = ("t", "re_a", "im_a", "s1x", "s1y", "s1z", "s2x", "s2y", "s2z",
                      "energy", "norm1", "norm2")


@dataclass(frozen=True)
class Controls:
    """Integrator and classifier settings.

    ``fp_tol`` and ``amp_tol`` are given per unit N1 and scaled by the model's
    N1 when used. ``n_samples`` uniform samples span [0, t_final] unless
    explicit ``sample_times`` are passed to :func:`integrate`.
    """

    rtol: float = 1e-10
    atol: float = 1e-12
    method: str = "DOP853"
    max_step: float = math.inf
    first_step: float | None = None
    n_samples: int = 4001
    norm_tol: float = 1e-8
    window_fraction: float = 0.2
    fp_tol: float = 1e-4
    amp_tol: float = 1e-3
    # a trailing window counts as decaying when its last third has lost this
    # fraction of the first third's amplitude
    decay_rtol: float = 1e-2

    def __post_init__(self):
        if self.method not in ("DOP853", "RK45"):
            raise ParameterError("method must be 'DOP853' or 'RK45'")
        if not (self.rtol > 0 and self.atol > 0):
            raise ParameterError("tolerances must be > 0")
        if self.n_samples < 2:
            raise ParameterError("n_samples must be >= 2")
        if not 0 < self.window_fraction < 1:
            raise ParameterError("window_fraction must lie in (0, 1)")

    def replace(self, **kw) -> "Controls":
        return dataclasses.replace(self, **kw)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    y: np.ndarray  # (n_samples, 8) in the flat layout of nsdicke.core
    params: ModelParams
    n_rhs: int = 0

    @property
    def states(self) -> list[MeanFieldState]:
        return [MeanFieldState.from_vector(row) for row in self.y]

    @property
    def final(self) -> MeanFieldState:
        return MeanFieldState.from_vector(self.y[-1])

    @property
    def field(self) -> np.ndarray:
        return self.y[:, 0] + 1j * self.y[:, 1]

    @property
    def energy(self) -> np.ndarray:
        return energy_vector(self.y, self.params)

    @property
    def norms(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.linalg.norm(self.y[:, 2:5], axis=1),
                np.linalg.norm(self.y[:, 5:8], axis=1))

    @property
    def total_spin(self) -> np.ndarray:
        return self.y[:, 2:5] + self.y[:, 5:8]

    @property
    def staggered_spin(self) -> np.ndarray:
        return self.y[:, 2:5] - self.y[:, 5:8]

    def norm_drift(self) -> float:
        """Largest relative deviation of |S_l| from its initial value."""
        worst = 0.0
        for norm in self.norms:
            ref = norm[0]
            if ref > 0:
                worst = max(worst, float(np.max(np.abs(norm - ref))) / ref)
        return worst

    def table(self) -> np.ndarray:
        n1, n2 = self.norms
        return np.column_stack([self.times, self.y, self.energy, n1, n2])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRAJECTORY_COLUMNS)
            for row in self.table():
                w.writerow([repr(float(v)) for v in row])


def integrate(initial: MeanFieldState, params: ModelParams, t_final: float,
              controls: Controls = Controls(),
              sample_times: Sequence[float] | None = None) -> Trajectory:
    if not t_final > 0:
        raise ParameterError("t_final must be > 0")
    if sample_times is None:
        t_eval = np.linspace(0.0, t_final, controls.n_samples)
    else:
        t_eval = np.asarray(sample_times, dtype=float)
        if t_eval.ndim != 1 or np.any(np.diff(t_eval) <= 0) or t_eval[0] < 0 \
                or t_eval[-1] > t_final:
            raise ParameterError("sample_times must be ascending within [0, t_final]")
    y0 = initial.to_vector()
    kw = {}
    if controls.first_step is not None:
        kw["first_step"] = controls.first_step
    sol = solve_ivp(lambda t, y: rhs_vector(y, params), (0.0, t_final), y0,
                    method=controls.method, t_eval=t_eval, rtol=controls.rtol,
                    atol=controls.atol, max_step=controls.max_step, **kw)
    if sol.status != 0:
        raise StiffnessError(f"integration stopped at t={sol.t[-1] if sol.t.size else 0:.6g}: "
                             f"{sol.message}")
    traj = Trajectory(sol.t.copy(), sol.y.T.copy(), params, int(sol.nfev))
    drift = traj.norm_drift()
    if drift > 10 * controls.norm_tol:
        raise AccuracyError(f"spin-norm drift {drift:.3g} exceeds 10 x norm_tol "
                            f"({controls.norm_tol:g}); tighten rtol/atol")
    if drift > controls.norm_tol:
        warnings.warn(f"spin-norm drift {drift:.3g} above norm_tol {controls.norm_tol:g}",
                      RuntimeWarning, stacklevel=2)
    return traj


def perturbed_fixed_point(fp: FixedPointRecord, delta_a: complex = DEFAULT_DELTA_A):
    if not fp.exists:
        raise ValueError(f"{fp.label} does not exist at these parameters")
    s = fp.state
    return MeanFieldState(s.a + complex(delta_a), s.s1, s.s2)


def parity_trajectory(traj: Trajectory) -> Trajectory:
    return Trajectory(traj.times, traj.y * PARITY_DIAG, traj.params, traj.n_rhs)


@dataclass(frozen=True)
class AttractorVerdict:
    kind: str  # "fixed_point", "limit_cycle" or "undecided"
    transient_end: float
    label: PhaseLabel | None = None
    period: float | None = None
    amplitude: float | None = None
    distance: float | None = None

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "transient_end": self.transient_end}
        if self.label is not None:
            out["label"] = self.label.value
            out["distance"] = self.distance
        if self.period is not None:
            out["period"] = self.period
            out["amplitude"] = self.amplitude
        return out


def _acf_period(x: np.ndarray, dt: float) -> float | None:
    """Lag of the dominant autocorrelation peak, parabolically refined.

    The biased estimator tapers linearly with lag, so for a periodic signal the
    first full-period peak is also the highest; taking the first peak within
    10% of the best avoids locking onto a multiple of the period.
    """
    n = x.size
    nfft = 1 << (2 * n - 1).bit_length()
    spec = np.fft.rfft(x, nfft)
    acf = np.fft.irfft(spec * np.conj(spec), nfft)[:n]
    if acf[0] <= 0:
        return None
    acf /= acf[0]
    half = n // 2
    neg = np.flatnonzero(acf[:half] < 0)
    if neg.size == 0:
        return None
    seg = acf[neg[0]:half]
    interior = seg[1:-1]
    peaks = np.flatnonzero((interior > seg[:-2]) & (interior >= seg[2:])) + 1
    if peaks.size == 0:
        return None
    best = seg[peaks].max()
    if best <= 0:
        return None
    k = int(neg[0] + peaks[np.argmax(seg[peaks] >= 0.9 * best)])
    y0, y1, y2 = acf[k - 1], acf[k], acf[k + 1]
    denom = y0 - 2 * y1 + y2
    shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
    return float((k + shift) * dt)


def detect_limit_cycle(times: np.ndarray, signal: np.ndarray, amp_tol: float,
                       decay_rtol: float = Controls.decay_rtol):
    """``(period, amplitude)`` of a sustained oscillation, else ``None``.

    The window is resampled uniformly. Amplitude is half the peak-to-peak
    range; a window whose thirds shrink monotonically by more than
    ``decay_rtol`` overall is a spiral, not a cycle.
    """
    t = np.asarray(times, dtype=float)
    x = np.asarray(signal, dtype=float)
    if t.size < 16:
        return None
    grid = np.linspace(t[0], t[-1], t.size)
    x = np.interp(grid, t, x)
    dt = grid[1] - grid[0]
    amplitude = 0.5 * float(x.max() - x.min())
    if amplitude < amp_tol:
        return None
    thirds = [0.5 * float(c.max() - c.min()) for c in np.array_split(x, 3)]
    if thirds[0] > thirds[1] > thirds[2] and thirds[2] < (1 - decay_rtol) * thirds[0]:
        return None
    period = _acf_period(x - x.mean(), dt)
    if period is None:
        return None
    return period, amplitude


def _stable_targets(records, params):
    """Stable existing fixed points among ``records``."""
    out = []
    for rec in records:
        if rec.exists and classify_stability(rec, params).verdict is Verdict.STABLE:
            out.append(rec)
    return out


def classify_attractor(traj: Trajectory, fps: Sequence[FixedPointRecord] | None = None,
                       controls: Controls = Controls()) -> AttractorVerdict:
    p = traj.params
    if fps is None:
        fps = all_fixed_points(p)
    n = traj.times.size
    start = int(math.floor((1 - controls.window_fraction) * n))
    start = min(max(start, 0), n - 2)
    t_win = traj.times[start:]
    y_win = traj.y[start:]
    fp_tol = controls.fp_tol * p.n1

    best = None
    for rec in fps:
        if not rec.exists:
            continue
        d = np.linalg.norm(y_win - rec.state.to_vector(), axis=1)
        if np.all(d < fp_tol) and (best is None or d[-1] < best[1]):
            best = (rec, float(d[-1]))
    if best is not None:
        rec = best[0]
        if classify_stability(rec, p).verdict is Verdict.STABLE:
            d_all = np.linalg.norm(traj.y - rec.state.to_vector(), axis=1)
            outside = np.flatnonzero(d_all >= fp_tol)
            t_end = float(traj.times[outside[-1] + 1]) if outside.size else float(traj.times[0])
            return AttractorVerdict("fixed_point", t_end, label=rec.label, distance=best[1])
        return AttractorVerdict("undecided", float(t_win[0]))

    cycle = detect_limit_cycle(t_win, y_win[:, 2], controls.amp_tol * p.n1,
                               controls.decay_rtol)
    if cycle is not None:
        return AttractorVerdict("limit_cycle", float(t_win[0]), period=cycle[0],
                                amplitude=cycle[1])
    return AttractorVerdict("undecided", float(t_win[0]))


# Initial states used for the reference scenarios.

def fig3_initial_state(params: ModelParams, delta_a: complex = DEFAULT_DELTA_A) -> MeanFieldState:
    """S1 along (x+y)/sqrt2 and S2 along (x-z)/sqrt2, small seed field."""
    r = 1 / math.sqrt(2)
    h1, h2 = params.n1 / 2, params.n2 / 2
    return MeanFieldState(complex(delta_a), (r * h1, r * h1, 0.0), (r * h2, 0.0, -r * h2))


def basin_initial_state(params: ModelParams, label: PhaseLabel,
                        delta_a: complex = DEFAULT_DELTA_A) -> MeanFieldState:
    return perturbed_fixed_point(by_label(all_fixed_points(params))[label], delta_a)


__all__ = [
    "Controls", "Trajectory", "AttractorVerdict", "integrate", "perturbed_fixed_point",
    "parity_trajectory", "classify_attractor", "detect_limit_cycle",
    "fig3_initial_state", "basin_initial_state", "TRAJECTORY_COLUMNS", "DEFAULT_DELTA_A",
]
