"""Mean-field description of the two-ensemble Dicke model.

Two collective spins S1 and S2 couple to one damped cavity mode with opposite
signs,

    H = wc a^dag a + wa (S1z + S2z) + lam (a^dag + a) (S1x - S2x),

and the semiclassical state is (a, S1, S2). All rates are measured in units
of the cavity decay kappa and time in units of 1/kappa.

The flat real 8-vector layout used throughout the package is

    (Re a, Im a, S1x, S1y, S1z, S2x, S2y, S2z).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

# parity acts on (Re a, Im a, S1x, S1y, S1z, S2x, S2y, S2z); it is the pi rotation
# about z, so S_y flips with S_x (flipping S_x alone does not commute with the flow)
PARITY_DIAG = np.array([-1.0, -1.0, -1.0, -1.0, 1.0, -1.0, -1.0, 1.0])


@dataclass(frozen=True)
class ModelParams:
    """Model parameters in kappa units.

    ``n1`` and ``n2`` are ensemble sizes; the collective spin lengths are
    ``n1/2`` and ``n2/2``. ``omega_a = 0`` is accepted here so that dynamics
    can still be run; the steady-state enumeration refuses it.
    """

    omega_c: float = 1.0
    omega_a: float = 1.0
    kappa: float = 1.0
    lam: float = 0.0
    n1: float = 1.0
    n2: float = 0.3

    def __post_init__(self):
        checks = [
            (self.omega_c > 0, "omega_c must be > 0"),
            (self.omega_a >= 0, "omega_a must be >= 0"),
            (self.kappa >= 0, "kappa must be >= 0"),
            (self.lam >= 0, "lambda must be >= 0"),
            (self.n1 > 0, "n1 must be > 0"),
            (self.n2 >= 0, "n2 must be >= 0"),
            (self.n2 <= self.n1, "n2 must not exceed n1 (only N2/N1 <= 1 is modelled)"),
        ]
        for value in dataclasses.astuple(self):
            if not math.isfinite(value):
                raise ParameterError(f"parameters must be finite, got {self}")
        for ok, message in checks:
            if not ok:
                raise ParameterError(message)

    @classmethod
    def from_ratio(cls, n2_ratio: float, n1: float = 1.0, **kwargs) -> "ModelParams":
        if not 0 <= n2_ratio <= 1:
            raise ParameterError("n2 ratio must lie in [0, 1]")
        return cls(n1=n1, n2=n2_ratio * n1, **kwargs)

    @property
    def n2_ratio(self) -> float:
        return self.n2 / self.n1

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)


def _vec3(v) -> np.ndarray:
    arr = np.array(v, dtype=float).reshape(3)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MeanFieldState:
    """Field amplitude plus the two collective spin vectors.

    The same container is used for time derivatives returned by
    :func:`eom_rhs`.
    """

    a: complex
    s1: np.ndarray
    s2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "s1", _vec3(self.s1))
        object.__setattr__(self, "s2", _vec3(self.s2))

    def to_vector(self) -> np.ndarray:
        return np.array([self.a.real, self.a.imag, *self.s1, *self.s2])

    @classmethod
    def from_vector(cls, y) -> "MeanFieldState":
        y = np.asarray(y, dtype=float)
        return cls(complex(y[0], y[1]), y[2:5], y[5:8])

    def norms(self) -> tuple[float, float]:
        return float(np.linalg.norm(self.s1)), float(np.linalg.norm(self.s2))

    def distance(self, other: "MeanFieldState") -> float:
        return float(np.linalg.norm(self.to_vector() - other.to_vector()))

    def __repr__(self):
        return (f"MeanFieldState(a={self.a:.6g}, s1={np.round(self.s1, 8).tolist()}, "
                f"s2={np.round(self.s2, 8).tolist()})")


@dataclass(frozen=True)
class DerivedObservables:
    total_spin: np.ndarray
    staggered_spin: np.ndarray
    energy: float
    photon_number: float


def rhs_vector(y: np.ndarray, p: ModelParams) -> np.ndarray:
    """Equations of motion on the flat 8-vector."""
    ar, ai, s1x, s1y, s1z, s2x, s2y, s2z = y
    f = 2.0 * p.lam * ar  # lam (a + a*)
    wa = p.omega_a
    return np.array([
        -p.kappa * ar + p.omega_c * ai,
        -p.omega_c * ar - p.kappa * ai - p.lam * (s1x - s2x),
        -wa * s1y,
        wa * s1x - f * s1z,
        f * s1y,
        -wa * s2y,
        wa * s2x + f * s2z,
        -f * s2y,
    ])


def eom_rhs(state: MeanFieldState, params: ModelParams) -> MeanFieldState:
    """Time derivative (da/dt, dS1/dt, dS2/dt).

    Ensemble l couples through (-1)^l lam (a + a*), so dS1y/dt carries
    ``-lam (a + a*) S1z`` and dS2y/dt carries ``+lam (a + a*) S2z``.
    """
    return MeanFieldState.from_vector(rhs_vector(state.to_vector(), params))


def energy(state: MeanFieldState, params: ModelParams) -> float:
    a = state.a
    return float(params.omega_c * abs(a) ** 2
                 + params.omega_a * (state.s1[2] + state.s2[2])
                 + 2.0 * params.lam * a.real * (state.s1[0] - state.s2[0]))


def energy_vector(y: np.ndarray, params: ModelParams) -> np.ndarray:
    """Energy for one state vector or a stack of them (last axis of length 8)."""
    y = np.asarray(y)
    return (params.omega_c * (y[..., 0] ** 2 + y[..., 1] ** 2)
            + params.omega_a * (y[..., 4] + y[..., 7])
            + 2.0 * params.lam * y[..., 0] * (y[..., 2] - y[..., 5]))


def observables(state: MeanFieldState, params: ModelParams) -> DerivedObservables:
    return DerivedObservables(
        total_spin=state.s1 + state.s2,
        staggered_spin=state.s1 - state.s2,
        energy=energy(state, params),
        photon_number=abs(state.a) ** 2,
    )


def parity_transform(state: MeanFieldState) -> MeanFieldState:
    """Z2 parity: a -> -a, S_lx -> -S_lx, S_ly -> -S_ly."""
    return MeanFieldState.from_vector(PARITY_DIAG * state.to_vector())


def scale_transform(state: MeanFieldState, params: ModelParams, c: float):
    """Map onto the equivalent system with ensembles ``c`` times larger.

    N_l -> c N_l, S_l -> c S_l, a -> sqrt(c) a, lam -> lam / sqrt(c). The
    derivative then scales the same way as the state.
    """
    if not c > 0:
        raise ParameterError("scale factor must be > 0")
    rc = math.sqrt(c)
    new_state = MeanFieldState(rc * state.a, c * state.s1, c * state.s2)
    new_params = params.replace(n1=c * params.n1, n2=c * params.n2, lam=params.lam / rc)
    return new_state, new_params


def spin_norm_defect(state: MeanFieldState, params: ModelParams) -> tuple[float, float]:
    """|S_l| - N_l/2 for both ensembles."""
    n1, n2 = state.norms()
    return n1 - params.n1 / 2, n2 - params.n2 / 2
