"""Two-ensemble Dicke model: steady states, stability, dynamics, sweeps and a
small open-system quantum solver."""

__version__ = "0.1.0"

from .core import (DerivedObservables, MeanFieldState, ModelParams, energy, eom_rhs,
                   observables, parity_transform, scale_transform)
from .steadystate import (FixedPointRecord, PhaseLabel, all_fixed_points, critical_couplings,
                          normal_fixed_points, superradiant_fixed_points)
from .stability import StabilityReport, Verdict, classify_stability, jacobian

__all__ = [
    "__version__", "ModelParams", "MeanFieldState", "DerivedObservables", "eom_rhs",
    "energy", "observables", "parity_transform", "scale_transform", "PhaseLabel",
    "FixedPointRecord", "critical_couplings", "normal_fixed_points",
    "superradiant_fixed_points", "all_fixed_points", "StabilityReport", "Verdict",
    "classify_stability", "jacobian",
]
