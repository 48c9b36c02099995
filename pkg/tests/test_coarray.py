import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foha.coarray import (BOTH_FORMS, Form, LagSet, SensorArray, central_consecutive,
                          cross_sum, diff2, fodca, fodca_lag_matrix, holes, sum2)

from conftest import oracle_extent, oracle_fodca

geometries = st.sets(st.integers(0, 40), min_size=1, max_size=6).map(sorted)


def lagset(values):
    return LagSet.from_values(np.array(values))


class TestSensorArray:
    def test_sorted_unique(self):
        assert SensorArray([5, 0, 2]).positions == (0, 2, 5)

    @pytest.mark.parametrize("bad", [[0, 0], [-1, 2], [0, 1.5]])
    def test_rejects_invalid(self, bad):
        with pytest.raises(ValueError):
            SensorArray(bad)

    def test_union_disjoint(self):
        assert SensorArray([0, 1]).union(SensorArray([4])).positions == (0, 1, 4)
        with pytest.raises(ValueError):
            SensorArray([0, 1]).union(SensorArray([1]))


class TestSecondOrder:
    def test_single_sensor(self):
        assert diff2(SensorArray([0])).as_set() == {0}
        assert sum2(SensorArray([0])).as_set() == {0}

    def test_diff2_small(self):
        assert diff2(SensorArray([0, 1, 3])).as_set() == set(range(-3, 4))

    def test_nested_generator(self):
        P = SensorArray([0, 1, 2, 5, 8])
        assert set(range(-8, 9)) <= diff2(P).as_set()
        assert set(range(0, 11)) <= sum2(P).as_set()

    def test_sum2_pair(self):
        assert sum2(SensorArray([0, 1])).as_set() == {0, 1, 2}

    def test_empty(self):
        with pytest.raises(ValueError, match="empty geometry"):
            diff2([])

    @given(geometries)
    def test_against_pairs(self, p):
        P = SensorArray(p)
        assert diff2(P).as_set() == {a - b for a in p for b in p}
        assert sum2(P).as_set() == {a + b for a in p for b in p}
        assert diff2(P).total_count == len(p) ** 2


class TestCrossSum:
    def test_equals_sum2(self):
        assert cross_sum([SensorArray([0, 1])] * 2, [1, 1]).as_set() == {0, 1, 2}

    def test_third_order(self):
        assert cross_sum([SensorArray([0, 1])] * 3, [1, 1, -1]).as_set() == {-1, 0, 1, 2}
        assert cross_sum([SensorArray([0, 2])] * 3, [1, -1, -1]).as_set() == {-4, -2, 0, 2}

    @pytest.mark.parametrize("signs", [[1], [1, 1, 1, 1], [1, 2]])
    def test_bad_arity_or_sign(self, signs):
        sets = [SensorArray([0, 1])] * len(signs)
        with pytest.raises(ValueError):
            cross_sum(sets, signs)

    @given(geometries, geometries, geometries,
           st.lists(st.sampled_from([1, -1]), min_size=3, max_size=3))
    def test_against_product(self, a, b, c, signs):
        got = cross_sum([SensorArray(a), SensorArray(b), SensorArray(c)], signs).as_set()
        want = {signs[0] * x + signs[1] * y + signs[2] * z
                for x, y, z in itertools.product(a, b, c)}
        assert got == want


class TestFodca:
    def test_single_sensor(self):
        assert fodca(SensorArray([0])).as_set() == {0}

    def test_pair(self):
        L = fodca(SensorArray([0, 1]))
        assert L.as_set() == {-2, -1, 0, 1, 2}
        assert L.total_count == 2 * 2**4

    def test_na9_contains_extent(self, na9):
        L = fodca(na9.P)
        assert holes(L, 198) == []
        assert central_consecutive(L) == 198

    def test_cna9_extent(self, cna9):
        assert central_consecutive(fodca(cna9.P)) == 206

    def test_multiplicities_match_oracle(self, na9):
        assert fodca(na9.P).multiplicity == oracle_fodca(na9.P.positions)

    @settings(max_examples=40, deadline=None)
    @given(geometries)
    def test_properties(self, p):
        L = fodca(SensorArray(p))
        assert L.multiplicity == oracle_fodca(p)
        assert L.total_count == 2 * len(p) ** 4
        assert all(-u in L for u in L)
        assert central_consecutive(L) == oracle_extent(L.as_set())

    def test_forms_give_same_set(self):
        P = SensorArray([0, 1, 4, 9, 11])
        sd = fodca(P, [Form.SUM_DIFF])
        ds = fodca(P, [Form.DIFF_SUM])
        assert sd.as_set() == ds.as_set()
        assert sd.total_count == ds.total_count == len(P) ** 4

    def test_lag_matrix_layout(self):
        p = [0, 2, 7]
        M = fodca_lag_matrix(SensorArray(p))
        n = len(p)
        for k1, k2, k3, k4 in itertools.product(range(n), repeat=4):
            assert M[k1 * n + k2, k3 * n + k4] == p[k1] + p[k2] - p[k3] - p[k4]
            assert M[k1 * n + k3, k2 * n + k4] == p[k1] - p[k2] + p[k3] - p[k4]

    def test_provenance(self):
        p = [0, 1, 3]
        L = fodca(SensorArray(p))
        prov = L.provenance
        assert sum(len(v) for v in prov.values()) == 2 * len(p) ** 4
        for u, tuples in prov.items():
            assert len(tuples) == L.multiplicity[u]
            for k1, k2, k3, k4, form in tuples:
                if form is Form.SUM_DIFF:
                    assert p[k1] + p[k2] - p[k3] - p[k4] == u
                else:
                    assert p[k1] - p[k2] + p[k3] - p[k4] == u
        assert {t[4] for v in prov.values() for t in v} == set(BOTH_FORMS)


class TestExtentAndHoles:
    def test_full(self):
        L = lagset(range(-2, 3))
        assert central_consecutive(L) == 2
        assert holes(L, 2) == []

    def test_with_hole(self):
        L = lagset([-3, -1, 0, 1, 3])
        assert central_consecutive(L) == 1
        assert holes(L, 3) == [-2, 2]

    def test_no_origin(self):
        with pytest.raises(ValueError, match="origin"):
            central_consecutive(lagset([1, 2]))

    def test_negative_bound(self):
        with pytest.raises(ValueError):
            holes(lagset([0]), -1)
