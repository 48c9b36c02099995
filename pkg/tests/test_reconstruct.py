import math
from fractions import Fraction
from functools import reduce

import pytest
from hypothesis import given
from hypothesis import strategies as st

from foha.coarray import SensorArray
from foha.designs import optimize_foha
from foha.reconstruct import (check_reconstruction, foha_reconstruction, lcm_multi, lcm_pair,
                              lcm_seq, rational_lcm)


def brute_lcm(values):
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


class TestLcm:
    @pytest.mark.parametrize("b1, b2, expected", [(4, 2, 12), (1, 0, 1), (6, 4, 30)])
    def test_pair(self, b1, b2, expected):
        assert lcm_pair(b1, b2) == expected

    def test_pair_zero(self):
        with pytest.raises(ValueError):
            lcm_pair(0, 0)

    @pytest.mark.parametrize("args, expected", [((1, 1, 4), 12), ((2, 3, 3), 40),
                                                 ((5, 3, 2), 40), ((7, 2, 0), 1)])
    def test_seq(self, args, expected):
        assert lcm_seq(*args) == expected

    @given(st.integers(1, 30), st.integers(0, 12), st.integers(1, 5))
    def test_seq_against_brute(self, first, step, count):
        terms = [first + i * step for i in range(count)]
        assert lcm_seq(first, step, count) == brute_lcm(terms)

    def test_multi_rejects_zero(self):
        with pytest.raises(ValueError):
            lcm_multi([3, 0])

    def test_big_integers(self):
        # no overflow: product of the first 40 primes exceeds 64 bits
        primes = [p for p in range(2, 200) if all(p % d for d in range(2, p))][:40]
        assert lcm_multi(primes) == reduce(lambda a, b: a * b, primes)

    def test_rational(self):
        assert rational_lcm([Fraction(1), Fraction(1, 2)]) == 1
        assert rational_lcm([Fraction(2, 3), Fraction(3, 4)]) == 6


class TestFeasibility:
    def test_gcd_two(self):
        r = check_reconstruction(SensorArray([0, 2, 4]))
        assert not r.feasible and r.lcm_value == 1

    def test_ula(self):
        r = check_reconstruction(SensorArray([0, 1]))
        assert r.feasible and r.lcm_value == 2

    @given(st.sets(st.integers(1, 60), min_size=1, max_size=6))
    def test_equals_gcd_rule(self, nonzero):
        P = SensorArray([0, *sorted(nonzero)])
        assert check_reconstruction(P).feasible == (math.gcd(*nonzero) == 1)

    def test_all_zero(self):
        with pytest.raises(ValueError):
            check_reconstruction(SensorArray([0]))

    @pytest.mark.parametrize("N", range(4, 15))
    def test_designs_feasible(self, N):
        assert check_reconstruction(optimize_foha(N, "NA").P).feasible
        if N >= 5:
            assert check_reconstruction(optimize_foha(N, "CNA").P).feasible


class TestFohaReport:
    def test_na9(self, na9):
        r = foha_reconstruction(na9)
        assert r.zeta == {"zeta1": 2, "zeta2": 40}
        assert (r.eps1, r.eps2, r.eps3) == (40, 570, 5544)
        assert r.k_min == 526680 == math.lcm(40, 570, 5544)
        eps = (r.eps1, r.eps2, r.eps3)
        for c, p, j in zip(r.coefficients, na9.P, na9.subarray_of()):
            assert c * eps[j] == r.k_min * p

    @pytest.mark.parametrize("N", range(5, 13))
    def test_identity_holds(self, N):
        for kind in ("NA", "CNA"):
            d = optimize_foha(N, kind)
            r = foha_reconstruction(d)
            eps = (r.eps1, r.eps2, r.eps3)
            assert all(c * eps[j] == r.k_min * p
                       for c, p, j in zip(r.coefficients, d.P, d.subarray_of()))

    def test_cna9_segments(self, cna9):
        r = foha_reconstruction(cna9)
        # segments of cna_array(1, 3): {0}, {1, 3, 5}, {6}
        assert r.zeta == {"zeta1": 1, "zeta3": 15, "zeta4": 6}
        assert r.eps1 == 30

    def test_to_json(self, na9):
        doc = foha_reconstruction(na9).to_json()
        assert doc["k_min"] == 526680 and doc["feasible"] is True
