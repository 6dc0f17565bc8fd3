"""Linear stability of the mean-field fixed points.

The linearization lives in the real 8-dimensional coordinates of
:mod:`nsdicke.core`. Two kinds of eigenvalues carry no stability information
and are set aside before the verdict:

* structural zero modes: each spin length |S_l| is conserved, so the radial
  directions dS_l ~ S_l give two eigenvalues at 0;
* dark modes: the combination J = (S1x - S2x, S1y - S2y, S1z + S2z) evolves
  like the spin of a standard Dicke model, and |J| is conserved too. At
  every fixed point this leaves a spin precession mode whose eigenvector
  (right or left) has no field component. It never feels the cavity loss,
  so its eigenvalues sit exactly on the imaginary axis.

What remains decides the verdict: stable when every real part is below
``-eps_stab``, unstable when any is above ``+eps_stab``, marginal otherwise.
One refinement: a repeated eigenvalue on the imaginary axis (away from 0)
with fewer eigenvectors than its multiplicity is a Jordan block, which
grows secularly, so it makes the verdict unstable. This happens for the
zFi normal states at N2 = N1. Floating-point solvers split such a block by
about sqrt(eps), which the clustering below absorbs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .core import MeanFieldState, ModelParams
from .eigen import eigenvalues, sort_eigenvalues
from .steadystate import LABEL_ORDER, FixedPointRecord, PhaseLabel, all_fixed_points

EPS_STAB = 1e-9
EPS_ZERO = 1e-8
# relative singular-value cutoff for the field-free eigenvector test
DARK_SV_TOL = 1e-8
MAX_ZERO_MODES = 2
# imaginary-axis clusters: window on |Re|, merge radius and eigenvector cutoff
DEFECT_WINDOW = 1e-6
DEFECT_SV_TOL = 1e-7


class Verdict(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: tuple[complex, ...]
    verdict: Verdict
    zero_modes_excluded: int
    dark_modes_excluded: int = 0
    defective_modes: int = 0
    # eigenvalues that entered the verdict, sorted by descending real part
    relevant: tuple[complex, ...] = field(default=())

    @property
    def leading(self) -> complex:
        if not self.relevant:
            return complex(math.nan, math.nan)
        return self.relevant[0]

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "zero_modes_excluded": self.zero_modes_excluded,
            "dark_modes_excluded": self.dark_modes_excluded,
            "defective_modes": self.defective_modes,
            "re_lead": self.leading.real,
            "im_lead": self.leading.imag,
        }


def jacobian_vector(y, p: ModelParams) -> np.ndarray:
    """Analytic Jacobian of :func:`nsdicke.core.rhs_vector` at ``y``."""
    ar, _, _, s1y, s1z, _, s2y, s2z = (float(v) for v in y)
    lam, wa = p.lam, p.omega_a
    f = 2.0 * lam * ar
    g = 2.0 * lam
    J = np.zeros((8, 8))
    J[0, 0], J[0, 1] = -p.kappa, p.omega_c
    J[1, 0], J[1, 1] = -p.omega_c, -p.kappa
    J[1, 2], J[1, 5] = -lam, lam
    # ensemble 1: dS1y = wa S1x - f S1z, dS1z = f S1y
    J[2, 3] = -wa
    J[3, 0], J[3, 2], J[3, 4] = -g * s1z, wa, -f
    J[4, 0], J[4, 3] = g * s1y, f
    # ensemble 2 couples with the opposite sign
    J[5, 6] = -wa
    J[6, 0], J[6, 5], J[6, 7] = g * s2z, wa, f
    J[7, 0], J[7, 6] = -g * s2y, -f
    return J


def jacobian(state: MeanFieldState, params: ModelParams) -> np.ndarray:
    return jacobian_vector(state.to_vector(), params)


def _dark_multiplicity(J: np.ndarray, mu: complex, scale: float) -> int:
    """Number of independent eigenvectors at ``mu`` with no field component.

    A right eigenvector (0, u) needs the spin columns of ``J - mu`` to be rank
    deficient; a left one needs the spin rows to be. Only singular values are
    computed.
    """
    M = J - mu * np.eye(J.shape[0])
    tol = DARK_SV_TOL * max(scale, 1.0)
    best = 0
    for block in (M[:, 2:], M[2:, :]):
        sv = np.linalg.svd(block, compute_uv=False)
        best = max(best, int(np.sum(sv < tol)))
    return best


def _defect_count(J: np.ndarray, ev: list[complex], eps_zero: float, scale: float) -> int:
    """Missing eigenvectors over the imaginary-axis clusters with Im >= 0."""
    cand = [z for z in ev if abs(z.real) <= DEFECT_WINDOW * max(1.0, abs(z))
            and z.imag >= -DEFECT_WINDOW and abs(z) > eps_zero]
    missing = 0
    while cand:
        head = cand.pop(0)
        cluster = [head] + [z for z in cand if abs(z - head) <= DEFECT_WINDOW * max(1.0, abs(head))]
        cand = [z for z in cand if z not in cluster]
        if len(cluster) < 2:
            continue
        mu = sum(cluster) / len(cluster)
        sv = np.linalg.svd(J - mu * np.eye(J.shape[0]), compute_uv=False)
        geometric = int(np.sum(sv < DEFECT_SV_TOL * max(scale, 1.0)))
        missing += max(0, len(cluster) - geometric)
    return missing


def classify_spectrum(J: np.ndarray, eps_stab: float = EPS_STAB,
                      eps_zero: float = EPS_ZERO, spectrum=None) -> StabilityReport:
    """Apply the exclusion rules and the verdict to a Jacobian.

    ``spectrum`` lets batch callers pass eigenvalues computed elsewhere.
    """
    ev = sort_eigenvalues(eigenvalues(J) if spectrum is None
                          else [complex(z) for z in spectrum])
    remaining = list(ev)

    zero_idx = sorted((i for i, z in enumerate(remaining)
                       if abs(z.real) < eps_zero and abs(z.imag) < eps_zero),
                      key=lambda i: abs(remaining[i]))[:MAX_ZERO_MODES]
    n_zero = len(zero_idx)
    remaining = [z for i, z in enumerate(remaining) if i not in zero_idx]

    # only near-imaginary eigenvalues can change the verdict by being dark
    scale = float(np.abs(J).max())
    n_dark = 0
    near = 1e-7
    seen: list[complex] = []
    for mu in [z for z in remaining if abs(z.real) <= eps_stab]:
        if any(abs(mu - s) < near * max(1.0, abs(mu)) for s in seen):
            continue
        seen.append(mu)
        # J is real, so the conjugate cluster shares the count
        seen.append(mu.conjugate())
        d = _dark_multiplicity(J, mu, scale)
        for target in {mu, mu.conjugate()}:
            cluster = [z for z in remaining if abs(z - target) < near * max(1.0, abs(target))
                       and abs(z.real) <= eps_stab][:d]
            for z in cluster:
                remaining.remove(z)
            n_dark += len(cluster)

    n_defect = _defect_count(J, ev, eps_zero, scale)
    if n_defect or any(z.real > eps_stab for z in remaining):
        verdict = Verdict.UNSTABLE
    elif all(z.real < -eps_stab for z in remaining):
        verdict = Verdict.STABLE
    else:
        verdict = Verdict.MARGINAL
    return StabilityReport(tuple(ev), verdict, n_zero, n_dark, n_defect, tuple(remaining))


def classify_stability(fp: FixedPointRecord, params: ModelParams,
                       eps_stab: float = EPS_STAB,
                       eps_zero: float = EPS_ZERO) -> StabilityReport:
    if not fp.exists:
        raise ValueError(f"{fp.label} does not exist at these parameters")
    return classify_spectrum(jacobian(fp.state, params), eps_stab, eps_zero)


def classify_all(params: ModelParams, eps_stab: float = EPS_STAB,
                 eps_zero: float = EPS_ZERO):
    """``[(record, report_or_None), ...]`` for all eight labels."""
    out = []
    done: dict[PhaseLabel, StabilityReport] = {}
    for rec in all_fixed_points(params):
        rep = None
        if rec.exists:
            # parity partners have similar Jacobians, hence identical spectra
            rep = done.get(rec.label.parity_partner) if rec.label.is_superradiant else None
            if rep is None:
                rep = classify_stability(rec, params, eps_stab, eps_zero)
            done[rec.label] = rep
        out.append((rec, rep))
    return out


def stable_labels(params: ModelParams, **kw) -> set[PhaseLabel]:
    return {rec.label for rec, rep in classify_all(params, **kw)
            if rep is not None and rep.verdict is Verdict.STABLE}


@dataclass(frozen=True)
class ScanRow:
    lam: float
    label: PhaseLabel
    verdict: str  # a Verdict value, or "absent"
    re_lead: float
    im_lead: float
    n_zero_modes: int

    def as_tuple(self):
        return (self.lam, self.label.value, self.verdict, self.re_lead,
                self.im_lead, self.n_zero_modes)


SCAN_COLUMNS = ("lambda", "label", "verdict", "re_lead", "im_lead", "n_zero_modes")


def bifurcation_scan(params: ModelParams, lambda_grid, **kw) -> list[ScanRow]:
    grid = [float(x) for x in lambda_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("lambda grid must be strictly ascending")
    rows = []
    for lam in grid:
        for rec, rep in classify_all(params.replace(lam=lam), **kw):
            if rep is None:
                rows.append(ScanRow(lam, rec.label, "absent", math.nan, math.nan, 0))
            else:
                lead = rep.leading
                rows.append(ScanRow(lam, rec.label, rep.verdict.value, lead.real,
                                    lead.imag, rep.zero_modes_excluded))
    return rows


def leading_real_part(params: ModelParams, label: PhaseLabel) -> float:
    rec = next(r for r in all_fixed_points(params) if r.label is label)
    return classify_stability(rec, params).leading.real


def locate_crossing(params: ModelParams, label: PhaseLabel, lo: float, hi: float,
                    rtol: float = 1e-9, max_iter: int = 200) -> float:
    """Bisect for the coupling where ``label``'s leading real part crosses zero."""
    f_lo = leading_real_part(params.replace(lam=lo), label)
    f_hi = leading_real_part(params.replace(lam=hi), label)
    if (f_lo > 0) == (f_hi > 0):
        raise ValueError(f"no sign change of the leading eigenvalue on [{lo}, {hi}]")
    for _ in range(max_iter):
        if hi - lo <= rtol * abs(hi):
            break
        mid = 0.5 * (lo + hi)
        if (leading_real_part(params.replace(lam=mid), label) > 0) == (f_lo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


__all__ = [
    "EPS_STAB", "EPS_ZERO", "Verdict", "StabilityReport", "jacobian", "jacobian_vector",
    "eigenvalues", "classify_spectrum", "classify_stability", "classify_all",
    "stable_labels", "ScanRow", "SCAN_COLUMNS", "bifurcation_scan",
    "leading_real_part", "locate_crossing", "LABEL_ORDER",
]
