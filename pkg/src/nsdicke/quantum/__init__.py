"""Full quantum model: operators, Lindblad evolution and Husimi Q readout."""

from .master import (OBSERVABLE_COLUMNS, LindbladKernel, MasterResult, ObservableSeries,
                     default_dt, default_n_max, evolve_master, guideline_dt, hamiltonian,
                     lindblad_rhs)
from .operators import HilbertSpec, OperatorSet, build_operators, spin_matrices
from .phase_space import (LobeReport, QGrid, coherent_field_state, coherent_spin_state,
                          count_q_lobes, fock_state, husimi_q, parity_paired,
                          partial_trace_field, product_state, q_grid)
from .presets import INIT_CHOICES, fig4_initial_state, initial_state

__all__ = [
    "HilbertSpec", "OperatorSet", "build_operators", "spin_matrices", "hamiltonian",
    "lindblad_rhs", "LindbladKernel", "evolve_master", "guideline_dt", "default_dt",
    "default_n_max",
    "MasterResult", "ObservableSeries", "OBSERVABLE_COLUMNS", "coherent_spin_state",
    "fock_state", "coherent_field_state", "product_state", "partial_trace_field",
    "husimi_q", "q_grid", "QGrid", "count_q_lobes", "LobeReport", "parity_paired",
    "fig4_initial_state", "initial_state", "INIT_CHOICES",
]
