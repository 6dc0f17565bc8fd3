"""Named initial density matrices.

``fig3`` mirrors the mean-field limit-cycle start: vacuum field, S1 along
(x + y)/sqrt2 and S2 along (x - z)/sqrt2, each as an SU(2) coherent state.
It is also the documented initial state for the four-lobe Q-function run.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ParameterError
from .operators import HilbertSpec
from .phase_space import coherent_spin_state, fock_state, product_state

# name -> (Fock level, (theta1, phi1), (theta2, phi2))
_PRODUCT_STATES = {
    "fig3": (0, (math.pi / 2, math.pi / 4), (3 * math.pi / 4, 0.0)),
    "ground": (0, (math.pi, 0.0), (math.pi, 0.0)),
    "fock1": (1, (math.pi, 0.0), (math.pi, 0.0)),
    "zfi": (0, (math.pi, 0.0), (0.0, 0.0)),
}

INIT_CHOICES = tuple(_PRODUCT_STATES)


def initial_state(name: str, spec: HilbertSpec) -> np.ndarray:
    try:
        n, (t1, p1), (t2, p2) = _PRODUCT_STATES[name]
    except KeyError:
        raise ParameterError(f"unknown initial state {name!r}; choose from {INIT_CHOICES}")
    return product_state(spec, fock_state(spec.n_max, n),
                         coherent_spin_state(spec.j1, t1, p1),
                         coherent_spin_state(spec.j2, t2, p2))


def fig4_initial_state(spec: HilbertSpec) -> np.ndarray:
    return initial_state("fig3", spec)
