from __future__ import annotations

import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from varnorm.onsys import CoeffSeq, SamplePlan, SampleMode, SystemKind, SystemSpec, dirichlet_coeffs, l2_vp_norm
from varnorm.rearrange import (
    PlanMode,
    RearrangementPlan,
    apply_plan,
    block_moment_bound_check,
    block_moment_rhs,
    block_moment_rhs_enumerated,
    check_block_plan,
    counterexample_order,
    dyadic_blocks,
    garsia_bound,
    garsia_maxsum_moment,
    haar_counterexample_system,
    identity_plan,
    is_psi,
    mass_class,
    sample_plan,
    supports_disjoint,
)
from varnorm.varcore import BlockMode, prefix_path, restricted_variation, variation_exact


class TestBlocks:
    def test_example(self):
        part = dyadic_blocks(CoeffSeq(np.sqrt([0.25, 0.25, 0.5])))
        assert part.classes == {1: (3,), 2: (1, 2)}
        assert part.tail == ()

    def test_flat(self):
        part = dyadic_blocks(dirichlet_coeffs(32))
        assert part.classes == {5: tuple(range(1, 33))}

    def test_tiny_goes_to_tail(self):
        a = np.ones(16)
        a[5] = 1e-4
        a[9] = 0
        part = dyadic_blocks(CoeffSeq(a))
        assert part.tail == (6, 10)

    def test_zero_mass(self):
        with pytest.raises(ValueError):
            dyadic_blocks(CoeffSeq([0, 0]))

    def test_mass_class(self):
        assert mass_class(1.0) == 0 and mass_class(0.5) == 1 and mass_class(0.3) == 1 and mass_class(0.25) == 2
        with pytest.raises(ValueError):
            mass_class(0)

    def test_membership_invariant(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 200))
            a = rng.normal(size=n) * np.exp(rng.normal(scale=3, size=n))
            c = CoeffSeq(a)
            part = dyadic_blocks(c)
            w = c.masses / c.total_mass
            cutoff = math.ceil(2 * math.log(n)) if n > 1 else 0
            for j, members in part.classes.items():
                assert j < cutoff
                for i in members:
                    assert 2.0 ** (-j - 1) < w[i - 1] * (1 + 1e-12) and w[i - 1] <= 2.0**-j * (1 + 1e-12)
            for i in part.tail:
                assert w[i - 1] == 0 or w[i - 1] <= 2.0**-cutoff * (1 + 1e-12)


class TestPlans:
    def test_identity(self, rng):
        c = CoeffSeq(rng.normal(size=7))
        p = sample_plan(c, PlanMode.IDENTITY, 3)
        assert np.array_equal(p.permutation, np.arange(7))
        out = apply_plan(c, p)
        assert np.array_equal(out.coeffs, c.coeffs) and np.array_equal(out.basis, c.basis)

    def test_block_invariant(self):
        c = CoeffSeq(np.sqrt([0.25, 0.25, 0.5]))
        for seed in range(100):
            assert check_block_plan(sample_plan(c, PlanMode.BLOCK, seed))

    def test_block_invariant_random(self, rng):
        for seed in range(40):
            n = int(rng.integers(2, 300))
            a = rng.normal(size=n) * np.exp(rng.normal(scale=2, size=n))
            a[rng.random(n) < 0.1] = 0
            if not a.any():
                a[0] = 1
            plan = sample_plan(CoeffSeq(a), PlanMode.BLOCK, seed)
            assert check_block_plan(plan)
            assert plan.partition.blocks()[-1][1] == n

    def test_block_flat_is_uniform(self):
        # one class: every permutation of [4] equally likely
        c = dirichlet_coeffs(4)
        draws = 4800
        counts = Counter(tuple(sample_plan(c, PlanMode.BLOCK, 17, d).permutation) for d in range(draws))
        assert len(counts) == 24
        expected = draws / 24
        chi2 = sum((v - expected) ** 2 / expected for v in counts.values())
        assert chi2 < 41.64  # 99th percentile, 23 degrees of freedom

    def test_reproducible(self, rng):
        c = CoeffSeq(rng.normal(size=50))
        for mode in PlanMode:
            assert sample_plan(c, mode, 9) == sample_plan(c, mode, 9)
        assert sample_plan(c, PlanMode.UNIFORM, 9) != sample_plan(c, PlanMode.UNIFORM, 10)

    def test_json_roundtrip(self, rng):
        c = CoeffSeq(rng.normal(size=12))
        for mode in PlanMode:
            p = sample_plan(c, mode, 4)
            d = p.to_dict()
            assert sorted(d["permutation"]) == list(range(1, 13))
            assert RearrangementPlan.from_json(p.to_json()) == p

    def test_not_bijection(self):
        with pytest.raises(ValueError):
            RearrangementPlan(np.array([0, 0, 1]))
        with pytest.raises(ValueError):
            RearrangementPlan(np.array([0, 1]), signs=[1, 2])

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            apply_plan(CoeffSeq([1, 2, 3]), identity_plan(2))

    def test_flat_unchanged(self):
        c = dirichlet_coeffs(10)
        out = apply_plan(c, sample_plan(c, PlanMode.UNIFORM, 1))
        assert np.array_equal(out.coeffs, c.coeffs)

    def test_all_minus_signs(self, rng):
        a = rng.normal(size=6) + 1j * rng.normal(size=6)
        plan = RearrangementPlan(np.arange(6), PlanMode.SIGNS, 0, -np.ones(6))
        out = apply_plan(CoeffSeq(a), plan)
        assert np.array_equal(out.coeffs, -a)
        assert variation_exact(prefix_path(out.coeffs)).value == pytest.approx(variation_exact(prefix_path(a)).value)

    @given(st.integers(1, 40), st.sampled_from(list(PlanMode)), st.integers(0, 2**32))
    def test_inverse_and_mass(self, n, mode, seed):
        rng = np.random.default_rng(seed)
        c = CoeffSeq(rng.normal(size=n) + 1j * rng.normal(size=n))
        plan = sample_plan(c, mode, seed)
        out = apply_plan(c, plan)
        assert out.total_mass == pytest.approx(c.total_mass, rel=1e-12)
        back = apply_plan(out, plan.inverse())
        assert np.array_equal(back.coeffs, c.coeffs) and np.array_equal(back.basis, c.basis)

    def test_unimodular_invariance(self, rng):
        a = rng.normal(size=15) + 1j * rng.normal(size=15)
        u = np.exp(2j * np.pi * rng.random())
        for p in (1, 2, 3):
            assert variation_exact(prefix_path(a * u), p).value == pytest.approx(variation_exact(prefix_path(a), p).value, rel=1e-12)

    def test_block_split_inequality_on_plans(self, rng):
        for seed in range(20):
            a = rng.normal(size=40) * np.exp(rng.normal(scale=2, size=40))
            c = CoeffSeq(a)
            plan = sample_plan(c, PlanMode.BLOCK, seed)
            out = apply_plan(c, plan)
            path = prefix_path(out.coeffs)
            blocks = plan.partition.blocks()
            full = variation_exact(path).value ** 2
            vl = restricted_variation(path, blocks, BlockMode.BLOCK_LEVEL).value ** 2
            vs = restricted_variation(path, blocks, BlockMode.WITHIN_BLOCK).value ** 2
            assert full <= 3 * (vl + vs) * (1 + 1e-12)


class TestGarsia:
    def test_examples(self):
        assert garsia_maxsum_moment([1, -1]).mean == 1
        assert garsia_bound([1, -1]) == 2
        assert garsia_maxsum_moment([2.5]).mean == 6.25
        assert garsia_maxsum_moment(np.ones(4)).mean == 16

    def test_exact_vs_monte_carlo(self, rng):
        for m in (3, 5, 8):
            xs = rng.normal(size=m)
            ex = garsia_maxsum_moment(xs)
            mc = garsia_maxsum_moment(xs, 20000, 5, method="mc")
            assert ex.exact and not mc.exact
            assert abs(ex.mean - mc.mean) <= 4 * mc.stderr

    def test_method_errors(self):
        with pytest.raises(ValueError):
            garsia_maxsum_moment(np.ones(9), method="exact")
        with pytest.raises(ValueError):
            garsia_maxsum_moment([], 10)
        with pytest.raises(ValueError):
            garsia_maxsum_moment([1], method="fast")

    def test_block_examples(self):
        xs = [1, -1]
        assert block_moment_bound_check(xs, 1).lhs.mean == 2
        assert block_moment_bound_check([0, 0, 0], 2).lhs.mean == 0
        with pytest.raises(ValueError):
            block_moment_bound_check(xs, 3)
        with pytest.raises(ValueError):
            block_moment_bound_check(xs, 0)

    def test_one_block_dominates_prefix_max(self, rng):
        for _ in range(10):
            xs = rng.normal(size=int(rng.integers(1, 8)))
            one = block_moment_bound_check(xs, len(xs)).lhs.mean
            assert one >= garsia_maxsum_moment(xs).mean - 1e-12

    def test_rhs_closed_form(self, rng):
        for m in range(1, 9):
            xs = rng.normal(size=m)
            for size in range(1, m + 1):
                assert block_moment_rhs(xs, size) == pytest.approx(block_moment_rhs_enumerated(xs, size), rel=1e-12)


class TestCounterexample:
    def test_no_insertions(self):
        order = counterexample_order(12, [0] * 12)
        assert all(order.is_psi)
        assert order.order == tuple((1 << k) + 1 for k in range(1, 13))
        assert supports_disjoint(order.order)

    def test_rate_invariant(self):
        n = 4096

        def w(m: int) -> int:
            return math.floor(math.log(math.log(max(m, 16))))

        order = counterexample_order(n, w)
        counts = order.rho_count()
        assert all(counts[m - 1] <= w(m) for m in range(1, n + 1))
        psi = [h for h, f in zip(order.order, order.is_psi) if f]
        rho = [h for h, f in zip(order.order, order.is_psi) if not f]
        assert psi == sorted(psi) and rho == sorted(rho)
        assert supports_disjoint(psi)
        assert not any(is_psi(h) for h in rho)

    def test_greedy_fills_budget(self):
        order = counterexample_order(30, lambda m: m // 3)
        counts = order.rho_count()
        assert all(counts[m - 1] == m // 3 for m in range(1, 31))
        assert order.order[:6] == (3, 5, 0, 9, 17, 1)

    def test_rejects_non_monotone(self):
        with pytest.raises(ValueError):
            counterexample_order(5, [0, 1, 0, 1, 1])
        with pytest.raises(ValueError):
            counterexample_order(5, [0, 1])

    def test_system_l2v2_equals_norm(self, rng):
        spec = haar_counterexample_system(12, [0] * 12)
        c = CoeffSeq(rng.normal(size=12) + 1j * rng.normal(size=12))
        est = l2_vp_norm(spec, c, 2, SamplePlan(SampleMode.DYADIC_MIDPOINTS, 1))
        assert est.value == pytest.approx(math.sqrt(c.total_mass), rel=1e-9)

    def test_overlap_detected(self):
        assert not supports_disjoint([2, 4])
        assert supports_disjoint([2, 3])
