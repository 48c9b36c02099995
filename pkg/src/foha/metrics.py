"""Redundancy and mutual-coupling metrics of sparse arrays."""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .coarray import SensorArray


@dataclasses.dataclass(frozen=True)
class CouplingModel:
    """Banded symmetric Toeplitz mutual-coupling model.

    Attributes:
        B: Coupling limit; sensors further apart than ``B`` do not couple.
        c: Complex coefficients ``c_0 .. c_B`` with ``c_0 = 1`` and strictly
            decreasing magnitude.
    """

    B: int
    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=complex)
        object.__setattr__(self, "c", c)
        if self.B < 0 or len(c) != self.B + 1:
            raise ValueError("need exactly B + 1 coefficients")
        if c[0] != 1:
            raise ValueError("c_0 must be 1")
        if np.any(np.diff(np.abs(c)) >= 0):
            raise ValueError("coupling magnitudes must strictly decrease")

    def truncated(self, B: int) -> "CouplingModel":
        if B > self.B:
            raise ValueError("cannot extend a coupling model")
        return CouplingModel(B, self.c[:B + 1])

    def scaled(self, t: float) -> "CouplingModel":
        """Same model with every off-diagonal coefficient scaled by ``t``."""
        c = self.c.copy()
        c[1:] *= t
        return CouplingModel(self.B, c)


def reference_coupling_model(B: int = 100) -> CouplingModel:
    """Coupling model with ``c_1 = 0.3 exp(i pi/3)`` and ``c_l = c_1 exp(-i (l-1) pi/8) / l``."""
    if B < 1:
        raise ValueError("B must be at least 1")
    c1 = 0.3 * np.exp(1j * np.pi / 3)
    ell = np.arange(1, B + 1)
    c = np.empty(B + 1, dtype=complex)
    c[0] = 1.0
    c[1:] = c1 * np.exp(-1j * (ell - 1) * np.pi / 8) / ell
    return CouplingModel(B, c)


def coupling_matrix(P: SensorArray, model: CouplingModel) -> np.ndarray:
    """N x N coupling matrix; complex symmetric, not Hermitian."""
    p = P.as_array()
    sep = np.abs(p[:, None] - p[None, :])
    C = np.zeros(sep.shape, dtype=complex)
    inside = sep <= model.B
    C[inside] = model.c[sep[inside]]
    return C


def coupling_leakage(C: np.ndarray) -> float:
    """Frobenius energy ratio of the off-diagonal part of ``C``."""
    C = np.asarray(C)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError("coupling matrix must be square")
    total = np.linalg.norm(C, "fro")
    if total == 0:
        raise ValueError("zero coupling matrix")
    off = C - np.diag(np.diag(C))
    return float(np.linalg.norm(off, "fro") / total)


@dataclasses.dataclass(frozen=True)
class LeakageReport:
    L_direct: float
    L_prop: float | None
    L_prop_squared: float | None
    L1: float
    in_validity_region: bool


def _min_cross_gap(design) -> int:
    gaps = [min(design.A2) - design.A1.aperture, min(design.A3) - design.A2.aperture]
    if len(design.A2) > 1:
        gaps.append(design.params.eta1)
    if len(design.A3) > 1:
        gaps.append(design.params.eta2)
    return min(gaps)


def leakage_decomposition(design, model: CouplingModel) -> LeakageReport:
    """Coupling leakage of a FOHA versus the generator-only prediction.

    When ``B`` is below every spacing outside the generator, the coupling
    matrix is block diagonal with identity blocks for ``A2`` and ``A3``, and
    the leakage follows from the generator alone:
    ``L = ||off(C1)|| / sqrt(||C1||^2 + N2 + N3)``. ``L_prop`` is that value
    written in terms of the generator leakage ``L1``. ``L_prop_squared`` is
    the variant with ``N2**2 + N3**2`` in place of ``N2 + N3``; it agrees
    with the block-diagonal value only when ``N2 = N3 = 1``.

    Outside the block-diagonal region ``L_prop`` and ``L_prop_squared`` are None.
    """
    C1 = coupling_matrix(design.A1, model)
    off1 = np.linalg.norm(C1 - np.diag(np.diag(C1)), "fro")
    L1 = coupling_leakage(C1)
    L_direct = coupling_leakage(coupling_matrix(design.P, model))
    valid = model.B < _min_cross_gap(design)
    if not valid:
        return LeakageReport(L_direct, None, None, L1, False)
    n2, n3 = len(design.A2), len(design.A3)
    if off1 == 0:
        return LeakageReport(L_direct, 0.0, 0.0, L1, True)
    # ||C1||_F^2 = off1^2 / L1^2
    L_prop = off1 * L1 / math.sqrt(off1**2 + L1**2 * (n2 + n3))
    L_squared = off1 * L1 / math.sqrt(off1**2 + L1**2 * n2**2 + L1**2 * n3**2)
    return LeakageReport(L_direct, L_prop, L_squared, L1, True)


def max_fodca_size(N: int) -> int:
    """One-sided maximal fourth-order co-array size ``(N^4 - 2N^3 + 7N^2 - 6N) / 8``."""
    if N < 1:
        raise ValueError("N must be positive")
    num = N**4 - 2 * N**3 + 7 * N**2 - 6 * N
    q, r = divmod(num, 8)
    assert r == 0, f"non-integer maximal co-array size for N={N}"
    return q


def redundancy_lower_bound(N: int) -> float:
    return (1 + 2 / (3 * math.pi)) * (N - 1) * (N**2 - N + 6) / (N * (N + 1) ** 2)


@dataclasses.dataclass(frozen=True)
class RedundancyReport:
    k4_tilde: int
    U4: int
    R4: float
    L4: float


def redundancy(design) -> RedundancyReport:
    """Fourth-order redundancy of a hole-free design and its lower bound."""
    if not design.certified:
        raise ValueError("redundancy needs a certified hole-free design")
    N = design.N
    k4 = max_fodca_size(N)
    R4 = k4 / design.E
    L4 = redundancy_lower_bound(N)
    if not R4 > L4:
        raise ValueError("redundancy below proven lower bound")
    return RedundancyReport(k4, design.E, R4, L4)
