"""Hilbert space and operator matrices for Fock(n_max) x spin(j1) x spin(j2).

Each ensemble lives in its maximal collective-spin sector j_l = N_l/2, with
basis states ordered m = j, j-1, ..., -j. The photon factor comes first in
every Kronecker product.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from ..errors import ParameterError, ResourceError

DEFAULT_BUDGET = 4096


def spin_matrices(j: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(S_z, S_+, S_-) for spin ``j`` in the descending-m basis."""
    two_j = round(2 * j)
    if two_j < 0 or abs(two_j - 2 * j) > 1e-12:
        raise ParameterError(f"spin must be a non-negative half-integer, got {j}")
    m = j - np.arange(two_j + 1)
    sz = np.diag(m)
    sp_ = np.zeros((two_j + 1, two_j + 1))
    # <m+1| S+ |m> = sqrt((j - m)(j + m + 1)); row index of m+1 is one above m
    for k in range(1, two_j + 1):
        sp_[k - 1, k] = np.sqrt((j - m[k]) * (j + m[k] + 1))
    return sz, sp_, sp_.T.copy()


def annihilation(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1)


@dataclass(frozen=True)
class HilbertSpec:
    n_max: int
    n1: int
    n2: int
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        for name in ("n_max", "n1", "n2", "budget"):
            value = getattr(self, name)
            if int(value) != value:
                raise ParameterError(f"{name} must be an integer, got {value}")
        if self.n_max < 1:
            raise ParameterError("n_max must be >= 1")
        if self.n1 < 0 or self.n2 < 0:
            raise ParameterError("ensemble sizes must be >= 0")
        if self.dim > self.budget:
            raise ResourceError(f"Hilbert dimension {self.dim} exceeds the budget "
                                f"{self.budget}; lower n_max or raise the budget")

    @property
    def j1(self) -> float:
        return self.n1 / 2

    @property
    def j2(self) -> float:
        return self.n2 / 2

    @property
    def n_fock(self) -> int:
        return self.n_max + 1

    @property
    def n_spin(self) -> int:
        """Dimension of the joint spin factor."""
        return (self.n1 + 1) * (self.n2 + 1)

    @property
    def dim(self) -> int:
        return self.n_fock * self.n_spin


class OperatorSet:
    """Sparse (CSR) embeddings of a, a^dag, S_lz and S_l+- in the full space.

    Factor-level matrices (``spin_*`` on the joint spin factor, ``a_fock`` on
    the photon factor) are kept as dense arrays for the structured kernels.
    """

    def __init__(self, spec: HilbertSpec):
        self.spec = spec
        F = spec.n_fock
        z1, p1, m1 = spin_matrices(spec.j1)
        z2, p2, m2 = spin_matrices(spec.j2)
        i1, i2 = np.eye(spec.n1 + 1), np.eye(spec.n2 + 1)
        self.a_fock = annihilation(spec.n_max)
        self.spin_s1z = np.kron(z1, i2)
        self.spin_s1p = np.kron(p1, i2)
        self.spin_s1m = np.kron(m1, i2)
        self.spin_s2z = np.kron(i1, z2)
        self.spin_s2p = np.kron(i1, p2)
        self.spin_s2m = np.kron(i1, m2)

        eye_f = sp.identity(F, format="csr")
        eye_s = sp.identity(spec.n_spin, format="csr")

        def on_spin(m):
            return sp.kron(eye_f, sp.csr_matrix(m), format="csr")

        self.a = sp.kron(sp.csr_matrix(self.a_fock), eye_s, format="csr")
        self.a_dag = self.a.T.tocsr()
        self.s1z = on_spin(self.spin_s1z)
        self.s1p = on_spin(self.spin_s1p)
        self.s1m = on_spin(self.spin_s1m)
        self.s2z = on_spin(self.spin_s2z)
        self.s2p = on_spin(self.spin_s2p)
        self.s2m = on_spin(self.spin_s2m)

    @property
    def dim(self) -> int:
        return self.spec.dim

    @cached_property
    def n_op(self):
        return (self.a_dag @ self.a).tocsr()

    @cached_property
    def s1x(self):
        return ((self.s1p + self.s1m) * 0.5).tocsr()

    @cached_property
    def s2x(self):
        return ((self.s2p + self.s2m) * 0.5).tocsr()

    @cached_property
    def s1y(self):
        return ((self.s1p - self.s1m) * (-0.5j)).tocsr()

    @cached_property
    def s2y(self):
        return ((self.s2p - self.s2m) * (-0.5j)).tocsr()

    @cached_property
    def spin_s1x(self) -> np.ndarray:
        return 0.5 * (self.spin_s1p + self.spin_s1m)

    @cached_property
    def spin_s2x(self) -> np.ndarray:
        return 0.5 * (self.spin_s2p + self.spin_s2m)

    @cached_property
    def spin_s1y(self) -> np.ndarray:
        return -0.5j * (self.spin_s1p - self.spin_s1m)

    @cached_property
    def spin_s2y(self) -> np.ndarray:
        return -0.5j * (self.spin_s2p - self.spin_s2m)

    def spin_squared(self, ensemble: int):
        """S_l^2 = S_lz^2 + (S_l+ S_l- + S_l- S_l+)/2 in the full space."""
        z, p, m = ((self.s1z, self.s1p, self.s1m) if ensemble == 1
                   else (self.s2z, self.s2p, self.s2m))
        return (z @ z + 0.5 * (p @ m + m @ p)).tocsr()

    def total_spin_squared(self):
        sx = self.s1x + self.s2x
        sy = self.s1y + self.s2y
        sz = self.s1z + self.s2z
        return (sx @ sx + sy @ sy + sz @ sz).tocsr()

    def parity_diagonal(self) -> np.ndarray:
        """Diagonal of exp(i pi (a^dag a + S1z + j1 + S2z + j2)), entries +-1."""
        spec = self.spec
        n = np.arange(spec.n_fock)
        m1 = np.arange(spec.n1 + 1)  # j1 - m in descending-m order
        m2 = np.arange(spec.n2 + 1)
        # S_lz + j_l = N_l - (j_l - m) has the parity of N_l + (j_l - m)
        e1 = spec.n1 - m1
        e2 = spec.n2 - m2
        exps = (n[:, None, None] + e1[None, :, None] + e2[None, None, :]).ravel()
        return np.where(exps % 2 == 0, 1.0, -1.0)


def build_operators(spec: HilbertSpec) -> OperatorSet:
    return OperatorSet(spec)


__all__ = ["HilbertSpec", "OperatorSet", "build_operators", "spin_matrices",
           "annihilation", "DEFAULT_BUDGET"]
