from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from varnorm.varcore import (
    BlockMode,
    Method,
    dyadic_maximal_sum,
    dyadic_upper_bound,
    evaluate_partition,
    extrema_candidates,
    extrema_pruned_value,
    extrema_pruned_variation,
    lacunary_increments,
    lacunary_variation,
    prefix_path,
    restricted_variation,
    sup_variation,
    variation_bruteforce,
    variation_exact,
    variation_value,
)

from .conftest import random_complex

floats = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, floats, floats)
P_VALUES = [1.0, 1.5, 2.0, 3.0]


def close(a: float, b: float, rel: float = 1e-12) -> bool:
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


class TestExamples:
    def test_prefix_path(self):
        assert list(prefix_path([]).sums) == [0]
        assert list(prefix_path([1, 1, 1]).sums) == [0, 1, 2, 3]
        assert list(prefix_path([1, -1]).sums) == [0, 1, 0]

    def test_exact(self):
        assert variation_exact(prefix_path([3 + 0j]), 2).value == 3
        r = variation_exact(prefix_path([1, 1, 1, 1]), 2)
        assert r.value == 4 and r.breakpoints == (0, 4)
        r = variation_exact(prefix_path([1, -1, 1, -1]), 2)
        assert r.value == 2 and r.breakpoints == (0, 1, 2, 3, 4)

    def test_bruteforce(self):
        assert variation_bruteforce(prefix_path([1, -1, 1, -1]), 2).value == 2
        assert variation_bruteforce(prefix_path([]), 2).value == 0
        assert variation_bruteforce(prefix_path([2]), 3).value == pytest.approx(2, rel=1e-15)

    def test_sup(self):
        assert sup_variation(prefix_path([1, 1, 1])).value == 3
        assert sup_variation(prefix_path([1, -2, 1])).value == 2
        assert sup_variation(prefix_path([1j, 1j])).value == 2

    def test_dyadic(self):
        assert dyadic_upper_bound(prefix_path([1, 1, 1, 1])) == pytest.approx(6 + 2 * math.sqrt(2), rel=1e-14)
        assert dyadic_upper_bound(prefix_path([3 - 4j])) == pytest.approx(5)
        assert dyadic_upper_bound(prefix_path([1, -1, 1, -1])) == pytest.approx(2)

    def test_lacunary(self):
        assert list(lacunary_increments(prefix_path([1, 1, 1, 1]))) == [1, 1, 2]
        assert lacunary_variation(prefix_path([1, 1, 1, 1])).value == 4
        assert lacunary_variation(prefix_path([2j])).value == 2
        r = lacunary_variation(prefix_path([1, -1, 0, 0]))
        assert r.value == pytest.approx(math.sqrt(2)) and r.method is Method.LACUNARY

    def test_lacunary_non_power_of_two_tail(self):
        # indices 1, 2, 4, then the remainder up to 6
        assert list(lacunary_increments(prefix_path([1, 2, 3, 4, 5, 6]))) == [1, 2, 7, 11]

    def test_restricted(self):
        path = prefix_path([1, -1, 1, -1])
        blocks = [(1, 2), (3, 4)]
        assert restricted_variation(path, blocks, BlockMode.BLOCK_LEVEL).value == 0
        assert restricted_variation(path, blocks, BlockMode.WITHIN_BLOCK).value == pytest.approx(2)
        path = prefix_path([2, -1, 3j])
        assert restricted_variation(path, [(1, 3)], "BLOCK_LEVEL").value == pytest.approx(abs(1 + 3j))

    def test_extrema(self):
        path = prefix_path([1, 1, 1, 1])
        assert list(extrema_candidates(path)) == [0, 4]
        assert extrema_pruned_variation(path).value == 4
        assert extrema_pruned_variation(prefix_path([1, -1, 1, -1])).value == pytest.approx(2)
        path = prefix_path([2, -1, 3])
        assert extrema_pruned_variation(path).value == pytest.approx(variation_exact(path).value, rel=1e-12)

    def test_empty(self):
        empty = prefix_path([])
        assert variation_exact(empty).value == 0
        assert variation_value(empty) == 0
        assert sup_variation(empty).value == 0
        assert extrema_pruned_variation(empty).value == 0


class TestErrors:
    def test_p_below_one(self):
        with pytest.raises(ValueError):
            variation_exact(prefix_path([1]), 0.5)

    def test_infinite_p(self):
        with pytest.raises(ValueError):
            variation_exact(prefix_path([1]), math.inf)

    def test_brute_force_budget(self):
        with pytest.raises(ValueError):
            variation_bruteforce(prefix_path(np.ones(21)), 2)

    def test_nonfinite(self):
        with pytest.raises(ValueError):
            prefix_path([1, math.nan])

    def test_complex_extrema(self):
        with pytest.raises(ValueError):
            extrema_pruned_variation(prefix_path([1j, 1]))

    @pytest.mark.parametrize("blocks", [[(1, 2)], [(1, 2), (4, 4)], [(2, 4)], [(1, 3), (3, 4)]])
    def test_bad_blocks(self, blocks):
        with pytest.raises(ValueError):
            restricted_variation(prefix_path([1, 2, 3, 4]), blocks, BlockMode.BLOCK_LEVEL)


class TestOracle:
    @pytest.mark.parametrize("p", P_VALUES)
    def test_dp_matches_brute_force(self, rng, p):
        for _ in range(60):
            n = int(rng.integers(0, 13))
            path = prefix_path(random_complex(rng, n))
            ex = variation_exact(path, p)
            bf = variation_bruteforce(path, p)
            assert close(ex.value, bf.value)
            assert ex.breakpoints == bf.breakpoints
            assert close(variation_value(path, p), ex.value)

    @pytest.mark.parametrize("p", P_VALUES)
    def test_pruned_matches_brute_force(self, rng, p):
        for _ in range(60):
            n = int(rng.integers(0, 13))
            path = prefix_path(rng.normal(size=n))
            bf = variation_bruteforce(path, p).value
            assert close(extrema_pruned_variation(path, p).value, bf)
            assert close(extrema_pruned_value(path, p), bf)

    def test_ties_on_integer_paths(self, rng):
        # small integer increments create many exact ties
        for _ in range(200):
            n = int(rng.integers(1, 10))
            path = prefix_path(rng.integers(-2, 3, size=n).astype(float))
            assert variation_exact(path, 2).breakpoints == variation_bruteforce(path, 2).breakpoints

    def test_value_kernel_long_path(self, rng):
        for p in P_VALUES:
            path = prefix_path(random_complex(rng, 700))
            assert close(variation_value(path, p), variation_exact(path, p).value, 1e-12)


class TestProperties:
    @given(st.lists(cplx, max_size=12), st.sampled_from(P_VALUES))
    def test_breakpoints_reproduce_value(self, a, p):
        path = prefix_path(a)
        r = variation_exact(path, p)
        assert r.breakpoints[0] == 0 and r.breakpoints[-1] == path.n
        assert all(x < y for x, y in zip(r.breakpoints, r.breakpoints[1:]))
        assert close(evaluate_partition(path, r.breakpoints, p), r.value)

    @given(st.lists(cplx, max_size=12))
    def test_monotone_in_p(self, a):
        path = prefix_path(a)
        vals = [variation_exact(path, p).value for p in P_VALUES]
        assert all(x >= y - 1e-12 * max(1, x) for x, y in zip(vals, vals[1:]))

    @given(st.lists(cplx, max_size=12), cplx, st.sampled_from(P_VALUES))
    def test_homogeneity(self, a, c, p):
        base = variation_exact(prefix_path(a), p).value
        scaled = variation_exact(prefix_path([c * x for x in a]), p).value
        assert scaled == pytest.approx(abs(c) * base, rel=1e-12, abs=1e-12)

    @given(st.lists(st.tuples(cplx, cplx), max_size=12), st.sampled_from(P_VALUES))
    def test_triangle(self, pairs, p):
        a = [x for x, _ in pairs]
        b = [y for _, y in pairs]
        lhs = variation_exact(prefix_path([x + y for x, y in pairs]), p).value
        rhs = variation_exact(prefix_path(a), p).value + variation_exact(prefix_path(b), p).value
        assert lhs <= rhs * (1 + 1e-12) + 1e-12

    @given(st.lists(cplx, min_size=1, max_size=16), st.sampled_from(P_VALUES))
    def test_domination(self, a, p):
        path = prefix_path(a)
        m = float(np.max(np.abs(path.sums)))
        s = sup_variation(path).value
        assert m - 1e-12 <= s <= 2 * m + 1e-12
        assert variation_exact(path, p).value >= s - 1e-12

    @given(st.lists(cplx, min_size=1, max_size=40))
    def test_dyadic_sandwich(self, a):
        path = prefix_path(a)
        assert variation_exact(path, 2).value <= math.sqrt(2) * dyadic_upper_bound(path) * (1 + 1e-12) + 1e-12
        assert variation_exact(path, 2).value ** 2 <= 4 * dyadic_maximal_sum(path) * (1 + 1e-12) + 1e-12

    @given(st.lists(cplx, min_size=1, max_size=14), st.data())
    def test_split_inequality(self, a, data):
        n = len(a)
        cuts = sorted(data.draw(st.sets(st.integers(1, n - 1), max_size=n - 1)) if n > 1 else [])
        edges = [0, *cuts, n]
        blocks = [(lo + 1, hi) for lo, hi in zip(edges, edges[1:])]
        path = prefix_path(a)
        full = variation_exact(path, 2).value ** 2
        vl = restricted_variation(path, blocks, BlockMode.BLOCK_LEVEL).value ** 2
        vs = restricted_variation(path, blocks, BlockMode.WITHIN_BLOCK).value ** 2
        assert full <= 3 * (vl + vs) * (1 + 1e-12) + 1e-12
        assert max(vl, vs) <= full * (1 + 1e-12) + 1e-12

    @given(st.lists(cplx, max_size=12), cplx, st.sampled_from(P_VALUES))
    def test_append_monotone(self, a, extra, p):
        before = variation_exact(prefix_path(a), p).value
        after = variation_exact(prefix_path([*a, extra]), p).value
        assert after >= before - 1e-12 * max(1, before)

    @given(st.lists(cplx, min_size=1, max_size=12), st.sampled_from(P_VALUES))
    def test_lacunary_below_full(self, a, p):
        path = prefix_path(a)
        assert lacunary_variation(path, p).value <= variation_exact(path, p).value * (1 + 1e-12) + 1e-12
