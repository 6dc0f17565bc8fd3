"""Closed-form mean-field fixed points.

Four normal fixed points (a = 0, spins along +-z) always exist. Above the
two critical couplings

    lam_c(xFo/xFi) = sqrt(wa (wc^2 + kappa^2) / ((N1 -+ N2) wc))

parity-paired superradiant branches appear: xFo with S1x and S2x parallel
(S1z < 0 < S2z) and xFi with S1x and S2x antiparallel (both S_lz < 0).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .core import MeanFieldState, ModelParams, energy
from .errors import UnsupportedParameterError


class PhaseLabel(str, enum.Enum):
    PLUS_ZFO_N = "+zFo-N"
    MINUS_ZFO_N = "-zFo-N"
    PLUS_ZFI_N = "+zFi-N"
    MINUS_ZFI_N = "-zFi-N"
    PLUS_XFO_SR = "+xFo-SR"
    MINUS_XFO_SR = "-xFo-SR"
    PLUS_XFI_SR = "+xFi-SR"
    MINUS_XFI_SR = "-xFi-SR"

    def __str__(self):
        return self.value

    @property
    def is_superradiant(self) -> bool:
        return self.value.endswith("SR")

    @property
    def parity_partner(self) -> "PhaseLabel":
        if not self.is_superradiant:
            return self
        flipped = ("-" if self.value[0] == "+" else "+") + self.value[1:]
        return PhaseLabel(flipped)


LABEL_ORDER = (
    PhaseLabel.PLUS_ZFO_N, PhaseLabel.MINUS_ZFO_N,
    PhaseLabel.PLUS_ZFI_N, PhaseLabel.MINUS_ZFI_N,
    PhaseLabel.PLUS_XFO_SR, PhaseLabel.MINUS_XFO_SR,
    PhaseLabel.PLUS_XFI_SR, PhaseLabel.MINUS_XFI_SR,
)

JSON_FIELDS = ("label", "exists", "a_re", "a_im",
               "s1x", "s1y", "s1z", "s2x", "s2y", "s2z", "energy")


@dataclass(frozen=True)
class FixedPointRecord:
    label: PhaseLabel
    state: MeanFieldState | None
    exists: bool
    energy: float
    # xFi/zFi become antiferromagnetic orderings when N1 == N2
    equal_sizes: bool = False

    @property
    def display_label(self) -> str:
        text = self.label.value
        if self.equal_sizes:
            text = text.replace("xFi", "xaF").replace("zFi", "zaF")
        return text

    def to_dict(self) -> dict:
        out = {"label": self.label.value, "exists": self.exists}
        if self.exists:
            v = self.state.to_vector()
            out.update(zip(JSON_FIELDS[2:10], (float(x) for x in v)))
            out["energy"] = self.energy
        else:
            out.update({k: None for k in JSON_FIELDS[2:]})
        if self.equal_sizes:
            out["display_label"] = self.display_label
        return out


def critical_couplings(params: ModelParams) -> tuple[float, float]:
    """Return ``(lam_c_xFo, lam_c_xFi)``; xFo is ``inf`` when N2 == N1."""
    p = params
    num = p.omega_a * (p.omega_c ** 2 + p.kappa ** 2)
    diff = p.n1 - p.n2
    xfo = math.sqrt(num / (diff * p.omega_c)) if diff > 0 else math.inf
    xfi = math.sqrt(num / ((p.n1 + p.n2) * p.omega_c))
    return xfo, xfi


def _require_supported(params: ModelParams):
    if params.omega_a == 0:
        raise UnsupportedParameterError(
            "omega_a = 0 is not covered by the fixed-point classification "
            "(S_ly = 0 in steady state requires omega_a != 0)")


def _record(label, state, params):
    return FixedPointRecord(label, state, True, energy(state, params),
                            equal_sizes=params.n1 == params.n2)


def normal_fixed_points(params: ModelParams) -> list[FixedPointRecord]:
    _require_supported(params)
    h1, h2 = params.n1 / 2, params.n2 / 2
    z = 0.0
    spins = {
        PhaseLabel.PLUS_ZFO_N: (h1, h2),
        PhaseLabel.MINUS_ZFO_N: (-h1, -h2),
        PhaseLabel.PLUS_ZFI_N: (h1, -h2),
        PhaseLabel.MINUS_ZFI_N: (-h1, h2),
    }
    return [_record(lab, MeanFieldState(0j, (z, z, s1z), (z, z, s2z)), params)
            for lab, (s1z, s2z) in spins.items()]


def superradiant_state(params: ModelParams, kind: str, sign: int) -> MeanFieldState:
    """Branch ``kind`` ('xFo' or 'xFi') with parity ``sign``; needs lam >= lam_c.

    At lam == lam_c the branch coincides with the normal state it bifurcates
    from.
    """
    p = params
    xfo, xfi = critical_couplings(p)
    lam_c = xfo if kind == "xFo" else xfi
    if not p.lam >= lam_c or math.isinf(lam_c):
        raise ValueError(f"{kind} branch does not exist at lam={p.lam}")
    h1, h2 = p.n1 / 2, p.n2 / 2
    root = math.sqrt(max(0.0, 1.0 - (lam_c / p.lam) ** 4))
    s1x = sign * h1 * root
    ratio = p.n2 / p.n1
    s2x = ratio * s1x if kind == "xFo" else -ratio * s1x
    # |S_lz| = (N_l/2) (lam_c/lam)^2 exactly; avoids cancellation near threshold
    q = (lam_c / p.lam) ** 2
    s1z = -h1 * q
    s2z = h2 * q if kind == "xFo" else -h2 * q
    a = p.lam * (s1x - s2x) / complex(-p.omega_c, p.kappa)
    return MeanFieldState(a, (s1x, 0.0, s1z), (s2x, 0.0, s2z))


def superradiant_fixed_points(params: ModelParams) -> list[FixedPointRecord]:
    """All four superradiant records; below-threshold ones carry ``exists=False``."""
    _require_supported(params)
    xfo, xfi = critical_couplings(params)
    out = []
    for kind, lam_c, plus, minus in (
            ("xFo", xfo, PhaseLabel.PLUS_XFO_SR, PhaseLabel.MINUS_XFO_SR),
            ("xFi", xfi, PhaseLabel.PLUS_XFI_SR, PhaseLabel.MINUS_XFI_SR)):
        exists = params.lam >= lam_c and not math.isinf(lam_c) and params.lam > 0
        for lab, sign in ((plus, 1), (minus, -1)):
            if exists:
                out.append(_record(lab, superradiant_state(params, kind, sign), params))
            else:
                out.append(FixedPointRecord(lab, None, False, math.nan,
                                            equal_sizes=params.n1 == params.n2))
    return out


def all_fixed_points(params: ModelParams) -> list[FixedPointRecord]:
    """Normal and superradiant records in :data:`LABEL_ORDER` (8 entries)."""
    return normal_fixed_points(params) + superradiant_fixed_points(params)


def existing(records) -> list[FixedPointRecord]:
    return [r for r in records if r.exists]


def by_label(records) -> dict[PhaseLabel, FixedPointRecord]:
    return {r.label: r for r in records}


def records_to_json(records) -> list[dict]:
    return [r.to_dict() for r in records]


def fixed_point_count(params: ModelParams) -> int:
    return len(existing(all_fixed_points(params)))


def steady_observables(record: FixedPointRecord) -> dict:
    """Sx, Sz, dSx, E0 and |a|^2 of one record (NaN when it does not exist)."""
    if not record.exists:
        return dict(Sx=math.nan, Sz=math.nan, dSx=math.nan, E0=math.nan, nphot=math.nan)
    s = record.state
    return dict(
        Sx=float(s.s1[0] + s.s2[0]),
        Sz=float(s.s1[2] + s.s2[2]),
        dSx=float(s.s1[0] - s.s2[0]),
        E0=record.energy,
        nphot=abs(s.a) ** 2,
    )


def parent_normal_label(label: PhaseLabel) -> PhaseLabel:
    """Normal state each superradiant branch bifurcates from."""
    if "xFo" in label.value:
        return PhaseLabel.MINUS_ZFI_N
    if "xFi" in label.value:
        return PhaseLabel.MINUS_ZFO_N
    return label


__all__ = [
    "PhaseLabel", "FixedPointRecord", "LABEL_ORDER", "critical_couplings",
    "normal_fixed_points", "superradiant_fixed_points", "superradiant_state",
    "all_fixed_points", "existing", "by_label", "records_to_json",
    "fixed_point_count", "steady_observables", "parent_normal_label",
]
