"""Exact LCM machinery and signal-reconstruction feasibility checks.

Positions are in units of half a wavelength, so the wavelength is 2 units.
Ratios ``wavelength / p`` are exact :class:`fractions.Fraction` values and all
LCMs are arbitrary-precision integers.
"""

from __future__ import annotations

import dataclasses
import math
from fractions import Fraction
from functools import reduce
from typing import Iterable

from .coarray import SensorArray
from .designs import FohaDesign, GeneratorKind

WAVELENGTH = 2


def lcm_pair(b1: int, b2: int) -> int:
    """``|b1 * (b1 + b2)| / gcd(b1, b1 + b2)``, i.e. lcm of ``b1`` and ``b1 + b2``.

    This is the two-term step of an arithmetic sequence with first term
    ``b1`` and difference ``b2``.
    """
    second = b1 + b2
    if b1 == 0 and second == 0:
        raise ValueError("lcm of two zeros is undefined")
    if b1 == 0 or second == 0:
        return abs(b1 or second)
    return abs(b1 * second) // math.gcd(b1, second)


def lcm_multi(numbers: Iterable[int]) -> int:
    """Least common multiple of positive integers, folded left to right."""
    numbers = list(numbers)
    if any(n <= 0 for n in numbers):
        raise ValueError(f"non-positive term in {numbers}")
    return reduce(math.lcm, numbers, 1)


def lcm_seq(first: int, step: int, count: int) -> int:
    """LCM of ``first, first + step, ..., first + (count - 1) * step``.

    An empty sequence (``count == 0``) has LCM 1; this arises for the dense
    generator segment when it holds only the zero sensor.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    return lcm_multi(first + i * step for i in range(count))


def rational_lcm(values: Iterable[Fraction]) -> Fraction:
    """LCM of positive rationals: ``lcm(a/b, c/d) = lcm(a, c) / gcd(b, d)``."""
    values = [Fraction(v) for v in values]
    if not values:
        raise ValueError("empty input")
    if any(v <= 0 for v in values):
        raise ValueError("rational LCM needs positive values")
    num = reduce(math.lcm, (v.numerator for v in values))
    den = reduce(math.gcd, (v.denominator for v in values))
    return Fraction(num, den)


@dataclasses.dataclass(frozen=True)
class ReconstructionCheck:
    feasible: bool
    lcm_value: Fraction


def check_reconstruction(P: SensorArray) -> ReconstructionCheck:
    """Unambiguity test: LCM of ``wavelength / p`` over non-zero sensors is at least 2.

    Equivalent to the non-zero positions having gcd 1.
    """
    nonzero = [p for p in P if p != 0]
    if not nonzero:
        raise ValueError("all positions are zero")
    value = rational_lcm(Fraction(WAVELENGTH, p) for p in nonzero)
    return ReconstructionCheck(value >= 2, value)


@dataclasses.dataclass(frozen=True)
class ReconstructionReport:
    feasible: bool
    lcm_value: Fraction
    zeta: dict[str, int]
    eps1: int
    eps2: int
    eps3: int
    k_min: int
    coefficients: list[int]

    def to_json(self) -> dict:
        return {
            "feasible": self.feasible,
            "lcm_value": str(self.lcm_value),
            "zeta": dict(self.zeta),
            "eps1": self.eps1,
            "eps2": self.eps2,
            "eps3": self.eps3,
            "k_min": self.k_min,
            "coefficients": list(self.coefficients),
        }


def foha_reconstruction(design: FohaDesign) -> ReconstructionReport:
    """Per-subarray LCMs, minimal scale ``k`` and coefficients of a FOHA.

    Each sequence LCM runs over the actual sensors of its segment, so the
    count argument is the segment size and the zero sensor is left out.
    """
    q = design.params
    if design.kind is GeneratorKind.NA:
        M1, M2 = q.M1, q.M2
        zeta = {
            "zeta1": lcm_seq(1, 1, M1 - 1),
            "zeta2": lcm_seq(2 * M1 - 1, M1, M2),
        }
        eps1 = math.lcm(zeta["zeta1"], zeta["zeta2"])
    elif design.kind is GeneratorKind.CNA:
        M1, M2 = q.M1, q.M2
        zeta = {
            "zeta1": lcm_seq(1, 1, M1 - 1),
            "zeta3": lcm_seq(M1, M1 + 1, M2),
            "zeta4": lcm_seq(M1 + (M1 + 1) * (M2 - 1) + 1, 1, M1),
        }
        eps1 = math.lcm(math.lcm(zeta["zeta1"], zeta["zeta3"]), zeta["zeta4"])
    else:
        raise ValueError("reconstruction report needs an NA or CNA design")
    eps2 = lcm_seq(q.delta1, q.eta1, q.N2)
    eps3 = lcm_seq(q.delta2, q.eta2, q.N3)
    total = lcm_multi([eps1, eps2, eps3])
    # smallest integer k with k >= 2 * total / wavelength
    bound = Fraction(2 * total, WAVELENGTH)
    k_min = math.ceil(bound)
    eps_of = (eps1, eps2, eps3)
    coefficients = []
    for p, j in zip(design.P, design.subarray_of()):
        c, r = divmod(k_min * p, eps_of[j])
        assert r == 0, f"coefficient for sensor {p} is not an integer"
        coefficients.append(c)
    check = check_reconstruction(design.P)
    return ReconstructionReport(check.feasible, check.lcm_value, zeta,
                                eps1, eps2, eps3, k_min, coefficients)
