"""Fourth-order hierarchical array (FOHA) construction and sensor-split search.

A FOHA is the union of three subarrays: a generator ``A1`` (nested or
concatenated nested array) and two uniform sparse subarrays ``A2``, ``A3``
whose offsets and spacings are chosen so the fourth-order difference
co-array is hole-free over ``[-E, E]``.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from fractions import Fraction
from typing import Iterable

from .coarray import (SensorArray, central_consecutive, diff2, fodca, holes,
                      sum2)


class GeneratorKind(str, enum.Enum):
    NA = "NA"
    CNA = "CNA"
    CUSTOM = "Custom"

    @classmethod
    def parse(cls, value) -> "GeneratorKind":
        if isinstance(value, cls):
            return value
        text = str(value).strip().upper()
        if text == "CUSTOM":
            return cls.CUSTOM
        return cls(text)


MIN_SENSORS = {GeneratorKind.NA: 4, GeneratorKind.CNA: 5}


@dataclasses.dataclass(frozen=True)
class FohaParams:
    generator_kind: GeneratorKind
    N1: int
    N2: int
    N3: int
    M1: int | None
    M2: int | None
    delta1: int
    eta1: int
    delta2: int
    eta2: int
    lambda1: int
    lambda2: int
    lambda3: int
    lambda4: int
    E: int

    def __post_init__(self):
        if min(self.N1, self.N2, self.N3) < 1:
            raise ValueError("every subarray needs at least one sensor")

    @property
    def N(self) -> int:
        return self.N1 + self.N2 + self.N3

    @property
    def dofs(self) -> int:
        return 2 * self.E + 1


@dataclasses.dataclass(frozen=True)
class FohaDesign:
    params: FohaParams
    A1: SensorArray
    A2: SensorArray
    A3: SensorArray
    P: SensorArray
    certified: bool = True

    @property
    def kind(self) -> GeneratorKind:
        return self.params.generator_kind

    @property
    def N(self) -> int:
        return len(self.P)

    @property
    def E(self) -> int:
        return self.params.E

    @property
    def dofs(self) -> int:
        return self.params.dofs

    @property
    def aperture(self) -> int:
        return self.P.aperture

    def subarray_of(self) -> list[int]:
        """Subarray index (0, 1, 2) of every sensor of ``P`` in position order."""
        lookup = {}
        for j, sub in enumerate((self.A1, self.A2, self.A3)):
            for p in sub:
                lookup[p] = j
        return [lookup[p] for p in self.P]

    def to_json(self) -> dict:
        q = self.params
        return {
            "kind": q.generator_kind.value,
            "N": self.N,
            "N1": q.N1,
            "N2": q.N2,
            "N3": q.N3,
            "M1": q.M1,
            "M2": q.M2,
            "delta1": q.delta1,
            "eta1": q.eta1,
            "delta2": q.delta2,
            "eta2": q.eta2,
            "E": q.E,
            "dofs": q.dofs,
            "positions": list(self.P.positions),
        }


def design_from_json(doc: dict) -> FohaDesign:
    """Rebuilds a design from its canonical JSON document."""
    kind = GeneratorKind.parse(doc["kind"])
    if kind is GeneratorKind.NA:
        design = build_foha_na(doc["M1"], doc["M2"], doc["N2"], doc["N3"])
    elif kind is GeneratorKind.CNA:
        design = build_foha_cna(doc["M1"], doc["M2"], doc["N2"], doc["N3"])
    else:
        positions = doc["positions"]
        n1 = doc["N1"]
        design = build_foha_general(SensorArray(positions[:n1]), doc["N2"], doc["N3"])
    if list(design.P.positions) != list(doc["positions"]):
        raise ValueError("positions in document do not match its parameters")
    return design


def _arith(first: int, step: int, count: int) -> list[int]:
    return [first + step * i for i in range(count)]


def nested_array(M1: int, M2: int) -> SensorArray:
    """Two-level nested array: ``{0..M1-1}`` then ``M2`` sensors spaced by ``M1``."""
    if M1 < 1 or M2 < 1:
        raise ValueError("nested array segment sizes must be positive")
    dense = range(M1)
    sparse = _arith(2 * M1 - 1, M1, M2)
    return SensorArray([*dense, *sparse])


def cna_array(M1: int, M2: int) -> SensorArray:
    """Concatenated nested array with ``2*M1 + M2`` sensors.

    Three segments: ``{0..M1-1}``, ``M2`` sensors from ``M1`` with spacing
    ``M1 + 1``, then ``M1`` consecutive sensors.
    """
    if M1 < 1 or M2 < 1:
        raise ValueError("CNA segment sizes must be positive")
    first = list(range(M1))
    middle = _arith(M1, M1 + 1, M2)
    tail_start = M1 + (M1 + 1) * (M2 - 1) + 1
    last = list(range(tail_start, tail_start + M1))
    return SensorArray([*first, *middle, *last])


def _prefix_extent(values: set[int]) -> int:
    top = -1
    while (top + 1) in values:
        top += 1
    return top


def lambda_extents(A1: SensorArray) -> tuple[int, int]:
    """Consecutive extents of the generator's sum and difference co-arrays.

    Returns:
        ``(lambda1, lambda2)`` where ``{0..lambda1}`` is in the sum co-array
        and ``{-lambda2..lambda2}`` is in the difference co-array.
    """
    lambda1 = _prefix_extent(sum2(A1).as_set())
    lambda2 = central_consecutive(diff2(A1))
    return lambda1, lambda2


@dataclasses.dataclass(frozen=True)
class HoleFreeConditions:
    cond_I: bool
    cond_II: bool
    cond_III: bool

    @property
    def all(self) -> bool:
        return self.cond_I and self.cond_II and self.cond_III


def check_holefree_conditions(A1: SensorArray) -> HoleFreeConditions:
    """Sufficient generator conditions for a hole-free FOHA co-array."""
    lambda1, lambda2 = lambda_extents(A1)
    top = A1.aperture
    return HoleFreeConditions(
        cond_I=lambda1 >= top,
        cond_II=lambda2 >= top,
        cond_III=2 * lambda2 >= lambda1,
    )


def _assemble(params: FohaParams, A1: SensorArray, certified: bool = True) -> FohaDesign:
    A2 = SensorArray(_arith(params.delta1, params.eta1, params.N2))
    A3 = SensorArray(_arith(params.delta2, params.eta2, params.N3))
    if not (min(A2) > A1.aperture and min(A3) > A2.aperture):
        raise AssertionError("subarrays are not ordered and disjoint")
    P = A1.union(A2, A3)
    return FohaDesign(params, A1, A2, A3, P, certified)


def foha_na_params(M1: int, M2: int, N2: int, N3: int) -> FohaParams:
    """Closed-form FOHA(NA) parameters; no arrays are built."""
    if min(M1, M2, N2, N3) < 1:
        raise ValueError("all counts must be at least 1")
    m = M1 * M2
    delta1 = 2 * m + 3 * M1 - 2
    eta1 = m + 2 * M1 - 1
    delta2 = (3 * N2 + 4) * m + (6 * N2 + 4) * M1 - (3 * N2 + 3)
    eta2 = (2 * N2 + 3) * m + (4 * N2 + 3) * M1 - (2 * N2 + 2)
    lambda1 = m + 2 * M1 - 2
    lambda2 = m + M1 - 1
    lambda3 = delta1 + eta1 * (N2 - 1)
    E = delta2 + eta2 * (N3 - 1) + lambda3
    return FohaParams(GeneratorKind.NA, M1 + M2, N2, N3, M1, M2, delta1, eta1,
                      delta2, eta2, lambda1, lambda2, lambda3, lambda3 + lambda2, E)


def foha_cna_params(M1: int, M2: int, N2: int, N3: int) -> FohaParams:
    """Closed-form FOHA(CNA) parameters; no arrays are built."""
    if min(M1, M2, N2, N3) < 1:
        raise ValueError("all counts must be at least 1")
    g = (M1 + 1) * (M2 - 1)
    delta1 = 6 * M1 + 3 * g + 1
    eta1 = 4 * M1 + 2 * g + 1
    delta2 = (12 * N2 + 8) * M1 + (6 * N2 + 4) * g + 3 * N2 + 1
    eta2 = (8 * N2 + 6) * M1 + (4 * N2 + 3) * g + 2 * N2 + 1
    lambda1 = 4 * M1 + 2 * g
    lambda2 = 2 * M1 + g
    lambda3 = delta1 + eta1 * (N2 - 1)
    E = delta2 + eta2 * (N3 - 1) + lambda3
    return FohaParams(GeneratorKind.CNA, 2 * M1 + M2, N2, N3, M1, M2, delta1, eta1,
                      delta2, eta2, lambda1, lambda2, lambda3, lambda3 + lambda2, E)


def build_foha_na(M1: int, M2: int, N2: int, N3: int) -> FohaDesign:
    return _assemble(foha_na_params(M1, M2, N2, N3), nested_array(M1, M2))


def build_foha_cna(M1: int, M2: int, N2: int, N3: int) -> FohaDesign:
    return _assemble(foha_cna_params(M1, M2, N2, N3), cna_array(M1, M2))


def build_foha_general(A1: SensorArray, N2: int, N3: int) -> FohaDesign:
    """FOHA around an arbitrary generator, certified by brute force.

    The offset of the third subarray contains ``(1/2 + N2) * lambda1``, which
    is rounded up when ``lambda1`` is odd. The returned design carries
    ``certified=False`` if the co-array turns out to have a hole in
    ``[-E, E]``.
    """
    if min(N2, N3) < 1:
        raise ValueError("N2 and N3 must be at least 1")
    if len(A1) == 0:
        raise ValueError("empty geometry")
    if not check_holefree_conditions(A1).all:
        raise ValueError("generator violates the hole-free conditions")
    lambda1, lambda2 = lambda_extents(A1)
    delta1 = A1.aperture + lambda1 + 1
    eta1 = lambda1 + 1
    lambda3 = delta1 + eta1 * (N2 - 1)
    lambda4 = lambda3 + lambda2
    delta2 = math.ceil(Fraction(1, 2) * lambda1 + N2 * lambda1) + lambda3 + lambda4 + N2 + 1
    eta2 = lambda3 + lambda4 + 1
    E = delta2 + eta2 * (N3 - 1) + lambda3
    params = FohaParams(GeneratorKind.CUSTOM, len(A1), N2, N3, None, None, delta1, eta1,
                        delta2, eta2, lambda1, lambda2, lambda3, lambda4, E)
    design = _assemble(params, A1)
    certified = not holes(fodca(design.P), E)
    return dataclasses.replace(design, certified=certified)


def round_half_away(x: Fraction) -> int:
    """Nearest integer, halves rounded away from zero."""
    x = Fraction(x)
    sign = 1 if x >= 0 else -1
    return sign * math.floor(abs(x) + Fraction(1, 2))


def na_n3_closed_form(N: int, N1: int) -> Fraction:
    n, n1 = Fraction(N), Fraction(N1)
    num = -n1**3 / 4 + (n / 4 - Fraction(15, 8)) * n1**2 + (2 * n + Fraction(3, 2)) * n1 - 2 * n
    return num / (n1**2 / 2 + 4 * n1 - 4)


def na_n2_closed_form(N: int, N1: int) -> Fraction:
    """Alternative N2 expression for FOHA(NA); kept for comparison only."""
    n, n1 = Fraction(N), Fraction(N1)
    num = -n1**3 / 4 + (n / 4 - Fraction(17, 8)) * n1**2 + (2 * n + Fraction(5, 2)) * n1 + 2 * n
    return num / (n1**2 / 2 + 4 * n1 - 4)


def cna_n3_closed_form(N: int, N1: int) -> Fraction:
    n, n1 = Fraction(N), Fraction(N1)
    num = (-n1**3 / 2 + (n / 2 - Fraction(25, 8)) * n1**2 + (3 * n + Fraction(3, 4)) * n1
           - Fraction(3, 2) * n - Fraction(1, 8))
    return num / (n1**2 + 6 * n1 - 3)


def cna_n2_closed_form(N: int, N1: int) -> Fraction:
    """Alternative N2 expression for FOHA(CNA); kept for comparison only."""
    n, n1 = Fraction(N), Fraction(N1)
    num = (-n1**3 / 2 + (n / 2 - Fraction(23, 8)) * n1**2 + (3 * n + Fraction(9, 4)) * n1
           - Fraction(3, 2) * n + Fraction(1, 8))
    return num / (n1**2 + 6 * n1 - 3)


def na_segments(N1: int) -> tuple[int, int]:
    return (N1 + 1) // 2, N1 // 2


def cna_segments(N1: int) -> tuple[int, int]:
    """Generator segment sizes for a CNA with ``N1`` sensors.

    ``M1`` is the rounded closed form; ``M2`` is then fixed by ``2*M1 + M2 = N1``.
    """
    M1 = max(1, round_half_away(Fraction(N1 - 1, 4)))
    M2 = N1 - 2 * M1
    if M2 < 1:
        raise ValueError(f"no CNA generator with {N1} sensors")
    return M1, M2


def _rank_key(params: FohaParams) -> tuple:
    # larger dofs first, then smaller aperture, then smaller N1
    aperture = params.delta2 + params.eta2 * (params.N3 - 1)
    return (-params.dofs, aperture, params.N1)


def _legal_segments(kind: GeneratorKind, N1: int) -> list[tuple[int, int]]:
    if kind is GeneratorKind.NA:
        return [(M1, N1 - M1) for M1 in range(1, N1)]
    return [(M1, N1 - 2 * M1) for M1 in range(1, (N1 - 1) // 2 + 1)]


def _closed_form_segments(kind: GeneratorKind, N1: int) -> tuple[int, int]:
    return na_segments(N1) if kind is GeneratorKind.NA else cna_segments(N1)


def _split_candidates(kind: GeneratorKind, N: int, N1: int,
                      segments: tuple[int, int]) -> list[FohaParams]:
    min_n1 = 2 if kind is GeneratorKind.NA else 3
    if not (min_n1 <= N1 <= N - 2):
        raise ValueError(f"infeasible N1={N1} for N={N} ({kind.value})")
    closed = na_n3_closed_form if kind is GeneratorKind.NA else cna_n3_closed_form
    build = foha_na_params if kind is GeneratorKind.NA else foha_cna_params
    rest = N - N1
    n3 = min(max(round_half_away(closed(N, N1)), 1), rest - 1)
    return [build(*segments, rest - c, c)
            for c in (n3 - 1, n3, n3 + 1) if 1 <= c <= rest - 1]


def _split(kind: GeneratorKind, N: int, N1: int) -> tuple[int, int]:
    candidates = _split_candidates(kind, N, N1, _closed_form_segments(kind, N1))
    best = min(candidates, key=lambda q: (_rank_key(q), q.N3))
    return best.N2, best.N3


def split_na(N: int, N1: int) -> tuple[int, int]:
    """Sensor counts ``(N2, N3)`` for FOHA(NA) given ``N`` and ``N1``.

    ``N3`` starts from the rounded stationary point of the DOF quadratic and
    is refined over its integer neighbours; ``N2`` takes the remaining
    sensors.
    """
    return _split(GeneratorKind.NA, N, N1)


def split_cna(N: int, N1: int) -> tuple[int, int]:
    """Sensor counts ``(N2, N3)`` for FOHA(CNA); see :func:`split_na`."""
    return _split(GeneratorKind.CNA, N, N1)


def _candidates_algorithm(kind: GeneratorKind, N: int,
                         segment_search: bool) -> Iterable[FohaParams]:
    min_n1 = 2 if kind is GeneratorKind.NA else 3
    for N1 in range(min_n1, N - 1):
        if segment_search:
            options = _legal_segments(kind, N1)
        else:
            options = [_closed_form_segments(kind, N1)]
        for segments in options:
            yield from _split_candidates(kind, N, N1, segments)


def _candidates_exhaustive(kind: GeneratorKind, N: int) -> Iterable[FohaParams]:
    build = foha_na_params if kind is GeneratorKind.NA else foha_cna_params
    for N1 in range(2, N - 1):
        for N2 in range(1, N - N1):
            for segments in _legal_segments(kind, N1):
                yield build(*segments, N2, N - N1 - N2)


def optimize_foha(N: int, generator_kind, exhaustive: bool = False,
                  segment_search: bool = True) -> FohaDesign:
    """Sensor allocation maximizing the DOFs of a FOHA with ``N`` sensors.

    The default loop visits every ``N1``, places ``N3`` at the rounded
    stationary point of the DOF quadratic (plus its two neighbours) and
    tries every legal generator split ``(M1, M2)``.

    Args:
        N: Total number of physical sensors.
        generator_kind: ``"NA"`` or ``"CNA"``.
        exhaustive: Search every ``(N1, N2, N3)`` partition and every legal
            generator split instead of the closed-form guided loop.
        segment_search: If False, the generator split is fixed by the closed
            form (``M1 = ceil(N1/2)`` for NA). That rule loses DOFs for even
            ``N1`` with a nested-array generator.

    Returns:
        The best design. Ties go to the smaller aperture, then smaller ``N1``.
    """
    kind = GeneratorKind.parse(generator_kind)
    if kind is GeneratorKind.CUSTOM:
        raise ValueError("optimization needs an NA or CNA generator")
    if N < MIN_SENSORS[kind]:
        raise ValueError(f"FOHA({kind.value}) needs at least {MIN_SENSORS[kind]} sensors, got {N}")
    if exhaustive:
        candidates = _candidates_exhaustive(kind, N)
    else:
        candidates = _candidates_algorithm(kind, N, segment_search)
    best = min(candidates, key=_rank_key)
    if kind is GeneratorKind.NA:
        return build_foha_na(best.M1, best.M2, best.N2, best.N3)
    return build_foha_cna(best.M1, best.M2, best.N2, best.N3)
