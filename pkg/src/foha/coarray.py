"""Exact integer co-array algebra for linear sensor arrays.

Positions are integers in units of half a wavelength. Everything here is
integer arithmetic; no floating point enters the co-array computations.
"""

from __future__ import annotations

import enum
import itertools
from typing import Callable, Iterable, Sequence

import numpy as np


class Form(str, enum.Enum):
    """The two ways of pairing four sensors into a fourth-order lag."""

    SUM_DIFF = "SumDiff"  # (a + b) - (c + d)
    DIFF_SUM = "DiffSum"  # (a - b) + (c - d)


BOTH_FORMS = (Form.SUM_DIFF, Form.DIFF_SUM)


class SensorArray:
    """Sorted set of non-negative integer sensor positions.

    Args:
        positions: Iterable of integer positions. Order does not matter;
            duplicates and negative values are rejected.
    """

    __slots__ = ("_positions",)

    def __init__(self, positions: Iterable[int]):
        values = []
        for p in positions:
            if isinstance(p, (float, np.floating)):
                if not float(p).is_integer():
                    raise ValueError(f"sensor position {p!r} is not an integer")
            values.append(int(p))
        values.sort()
        if any(a == b for a, b in zip(values, values[1:])):
            raise ValueError("sensor positions must be unique")
        if values and values[0] < 0:
            raise ValueError("sensor positions must be non-negative")
        self._positions = tuple(values)

    @property
    def positions(self) -> tuple[int, ...]:
        return self._positions

    def as_array(self) -> np.ndarray:
        return np.asarray(self._positions, dtype=np.int64)

    @property
    def aperture(self) -> int:
        return self._positions[-1] if self._positions else 0

    def __len__(self) -> int:
        return len(self._positions)

    def __iter__(self):
        return iter(self._positions)

    def __contains__(self, p) -> bool:
        return p in self._positions

    def __eq__(self, other) -> bool:
        if isinstance(other, SensorArray):
            return self._positions == other._positions
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._positions)

    def __repr__(self) -> str:
        return f"SensorArray({list(self._positions)})"

    def union(self, *others: "SensorArray") -> "SensorArray":
        merged = set(self._positions)
        for other in others:
            overlap = merged.intersection(other.positions)
            if overlap:
                raise ValueError(f"subarrays overlap at {sorted(overlap)}")
            merged.update(other.positions)
        return SensorArray(merged)


class LagSet:
    """A set of integer lags with per-lag multiplicities.

    ``lags`` is a sorted int64 array of distinct lags and ``counts`` holds the
    number of generating tuples of each. Provenance (the index tuples behind
    each lag) is only materialized on first access of :attr:`provenance`.
    """

    def __init__(self, lags: np.ndarray, counts: np.ndarray,
                 provenance_builder: Callable[[], dict] | None = None):
        self.lags = np.asarray(lags, dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.int64)
        if self.lags.shape != self.counts.shape:
            raise ValueError("lags and counts must have the same shape")
        self._provenance_builder = provenance_builder
        self._provenance = None
        self._members = None

    @classmethod
    def from_values(cls, values: np.ndarray,
                    provenance_builder: Callable[[], dict] | None = None) -> "LagSet":
        """Builds a lag set from the raw (repeated) lag values of every tuple."""
        lags, counts = np.unique(np.asarray(values, dtype=np.int64).ravel(),
                                 return_counts=True)
        return cls(lags, counts, provenance_builder)

    @property
    def multiplicity(self) -> dict[int, int]:
        return {int(u): int(c) for u, c in zip(self.lags, self.counts)}

    @property
    def provenance(self) -> dict | None:
        if self._provenance is None and self._provenance_builder is not None:
            self._provenance = self._provenance_builder()
        return self._provenance

    @property
    def total_count(self) -> int:
        return int(self.counts.sum())

    def _member_set(self) -> frozenset:
        if self._members is None:
            self._members = frozenset(int(u) for u in self.lags)
        return self._members

    def __contains__(self, u) -> bool:
        return int(u) in self._member_set()

    def __len__(self) -> int:
        return len(self.lags)

    def __iter__(self):
        return (int(u) for u in self.lags)

    def __eq__(self, other) -> bool:
        if isinstance(other, LagSet):
            return (np.array_equal(self.lags, other.lags)
                    and np.array_equal(self.counts, other.counts))
        return NotImplemented

    def __repr__(self) -> str:
        if len(self.lags) > 12:
            head = ", ".join(str(int(u)) for u in self.lags[:5])
            tail = ", ".join(str(int(u)) for u in self.lags[-5:])
            return f"LagSet([{head}, ..., {tail}], size={len(self.lags)})"
        return f"LagSet({[int(u) for u in self.lags]})"

    def as_set(self) -> set[int]:
        return set(self._member_set())


def _positions(operand) -> np.ndarray:
    if isinstance(operand, SensorArray):
        return operand.as_array()
    if isinstance(operand, LagSet):
        return operand.lags
    return np.asarray(list(operand), dtype=np.int64)


def _require_nonempty(P: SensorArray) -> np.ndarray:
    p = _positions(P)
    if p.size == 0:
        raise ValueError("empty geometry")
    return p


def diff2(P: SensorArray) -> LagSet:
    """Second-order difference co-array ``{m - n | m, n in P}``."""
    p = _require_nonempty(P)
    return LagSet.from_values(p[:, None] - p[None, :])


def sum2(P: SensorArray) -> LagSet:
    """Second-order sum co-array ``{m + n | m, n in P}``."""
    p = _require_nonempty(P)
    return LagSet.from_values(p[:, None] + p[None, :])


def cross_sum(sets: Sequence, signs: Sequence[int]) -> LagSet:
    """Signed cross sum of two or three operands.

    With ``signs`` all +1 this is the plain cross sum of the operands. Other
    sign patterns give the third-order co-arrays, e.g. ``[P, P, P]`` with
    ``[+1, +1, -1]`` is ``P + P - P``.

    Args:
        sets: Two or three operands (SensorArray, LagSet or integer iterable).
            Multiplicities of LagSet operands are ignored; only the distinct
            lags take part.
        signs: One of +1/-1 per operand.
    """
    if len(sets) not in (2, 3):
        raise ValueError(f"cross_sum takes 2 or 3 operands, got {len(sets)}")
    if len(signs) != len(sets):
        raise ValueError("need exactly one sign per operand")
    if any(s not in (1, -1) for s in signs):
        raise ValueError("signs must be +1 or -1")
    total = np.zeros(1, dtype=np.int64)
    for operand, sign in zip(sets, signs):
        values = _positions(operand)
        if values.size == 0:
            raise ValueError("empty geometry")
        total = (total[:, None] + sign * values[None, :]).ravel()
    return LagSet.from_values(total)


def fodca_lag_matrix(P: SensorArray) -> np.ndarray:
    """Lags of the SumDiff form as an N^2 x N^2 matrix.

    Entry ``[k1 * N + k2, k3 * N + k4]`` equals ``p[k1] + p[k2] - p[k3] - p[k4]``.
    The DiffSum lag of ``(k1, k2, k3, k4)`` is the entry at
    ``[k1 * N + k3, k2 * N + k4]``.
    """
    p = _require_nonempty(P)
    pair_sums = (p[:, None] + p[None, :]).ravel()
    return pair_sums[:, None] - pair_sums[None, :]


def _quadruple_provenance(p: np.ndarray, forms: tuple[Form, ...]) -> dict:
    n = len(p)
    table: dict[int, list] = {}
    for k1, k2, k3, k4 in itertools.product(range(n), repeat=4):
        for form in forms:
            if form is Form.SUM_DIFF:
                u = p[k1] + p[k2] - p[k3] - p[k4]
            else:
                u = p[k1] - p[k2] + p[k3] - p[k4]
            table.setdefault(int(u), []).append((k1, k2, k3, k4, form))
    return table


def fodca(P: SensorArray, forms: Sequence[Form] = BOTH_FORMS) -> LagSet:
    """Fourth-order difference co-array over both pairing forms.

    Multiplicities count index quadruples per form, so with both forms the
    counts sum to ``2 * N**4``. Provenance maps each lag to its
    ``(k1, k2, k3, k4, form)`` tuples (0-based sensor indices) and is built
    on first access.

    Args:
        P: Physical array.
        forms: Which pairing forms to include. Restricting to one form is an
            ablation switch; as sets both forms produce the same lags.
    """
    forms = tuple(Form(f) for f in forms)
    if not forms:
        raise ValueError("at least one form is required")
    lag_matrix = fodca_lag_matrix(P)
    values = np.concatenate([lag_matrix.ravel()] * len(set(forms)))
    p = P.as_array()
    return LagSet.from_values(values, lambda: _quadruple_provenance(p, forms))


def central_consecutive(L: LagSet) -> int:
    """Largest ``U`` such that every lag in ``[-U, U]`` belongs to ``L``."""
    members = L.as_set()
    if 0 not in members:
        raise ValueError("lag set lacks origin")
    u = 0
    while (u + 1) in members and -(u + 1) in members:
        u += 1
    return u


def holes(L: LagSet, bound: int) -> list[int]:
    """Sorted list of integers in ``[-bound, bound]`` missing from ``L``."""
    if bound < 0:
        raise ValueError("bound must be non-negative")
    window = np.arange(-bound, bound + 1, dtype=np.int64)
    missing = window[~np.isin(window, L.lags)]
    return [int(u) for u in missing]
