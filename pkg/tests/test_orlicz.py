from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from varnorm.onsys import CoeffSeq, SamplePlan, SampleMode, SystemKind, SystemSpec
from varnorm.orlicz import OrliczGauge, dyadic_orlicz_aggregate, gauge_eval, luxemburg_norm, pointwise_v2_norm

Ks = st.floats(1, 1e4, allow_nan=False)
ts = st.floats(-1e4, 1e4, allow_nan=False)


class TestGauges:
    def test_examples(self):
        assert gauge_eval(OrliczGauge(1), 2) == 4.75
        assert gauge_eval(OrliczGauge(4), 9, "SMALL") == 2
        for K in (1, 2.5, 9, 1000):
            g = OrliczGauge(K)
            inner = K**2.5
            outer = 1.25 * math.sqrt(K) * K**2 - 0.25 * K**2.5
            assert gauge_eval(g, K) == inner
            assert outer == pytest.approx(inner, rel=1e-15)

    def test_rejects_small_K(self):
        with pytest.raises(ValueError):
            OrliczGauge(0.5)

    @given(Ks, ts)
    def test_symmetric_and_small_dominated(self, K, t):
        g = OrliczGauge(K)
        assert gauge_eval(g, -t) == gauge_eval(g, t)
        assert t * t * gauge_eval(g, t, "SMALL") <= gauge_eval(g, t) * (1 + 1e-12)
        assert gauge_eval(g, t) <= abs(t) ** 2.5 * (1 + 1e-12)
        assert gauge_eval(g, 0) == 0

    @given(Ks, ts, ts)
    def test_midpoint_convex(self, K, s, t):
        g = OrliczGauge(K)
        mid = gauge_eval(g, (s + t) / 2)
        assert mid <= (gauge_eval(g, s) + gauge_eval(g, t)) / 2 * (1 + 1e-12) + 1e-12

    @given(st.floats(1, 100), st.floats(1, 100), ts)
    def test_increasing_in_K(self, K1, K2, t):
        lo, hi = sorted((K1, K2))
        assert gauge_eval(OrliczGauge(lo), t) <= gauge_eval(OrliczGauge(hi), t) * (1 + 1e-12)


class TestLuxemburg:
    def test_constant(self):
        for c in (0.01, 1, -3.2, 250):
            for K in (1, 7, 1e3):
                assert luxemburg_norm(np.full(9, c), OrliczGauge(K)) == pytest.approx(abs(c), rel=1e-10)

    def test_zero(self):
        assert luxemburg_norm(np.zeros(5), OrliczGauge(2)) == 0

    def test_nonfinite(self):
        with pytest.raises(ValueError):
            luxemburg_norm([1, math.inf], OrliczGauge(2))

    def test_constraint_attained(self, rng):
        g = OrliczGauge(3)
        f = rng.standard_cauchy(200)
        lam = luxemburg_norm(f, g)
        assert float(np.mean(g.big(f / lam))) <= 1
        assert float(np.mean(g.big(f / (lam * (1 - 1e-9))))) > 1

    def test_weights(self, rng):
        f = rng.normal(size=20)
        g = OrliczGauge(2)
        doubled = np.repeat(f, 2)
        assert luxemburg_norm(f, g, np.full(20, 0.05)) == pytest.approx(luxemburg_norm(doubled, g), rel=1e-10)
        with pytest.raises(ValueError):
            luxemburg_norm(f, g, np.ones(3))

    def test_properties(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 50))
            K = float(rng.uniform(1, 50))
            g = OrliczGauge(K)
            f = rng.normal(size=n) * np.exp(rng.normal(size=n))
            h = rng.normal(size=n) * 3
            c = float(rng.normal() * 10)
            nf = luxemburg_norm(f, g)
            assert luxemburg_norm(c * f, g) == pytest.approx(abs(c) * nf, rel=1e-9)
            assert luxemburg_norm(f + h, g) <= (nf + luxemburg_norm(h, g)) * (1 + 1e-9)
            fam = rng.normal(size=(4, n))
            lhs = luxemburg_norm(np.sqrt(np.sum(fam**2, axis=0)), g)
            rhs = math.sqrt(sum(luxemburg_norm(row, g) ** 2 for row in fam))
            assert lhs <= rhs * (1 + 1e-9)
            assert luxemburg_norm(f, OrliczGauge(K + 5)) >= nf * (1 - 1e-9)


class TestAggregate:
    def test_single_index_unimodular(self, rng):
        c = CoeffSeq(rng.normal(size=16) + 1j * rng.normal(size=16))
        plan = SamplePlan(SampleMode.UNIFORM_GRID, 33)
        for n in (1, 7, 16):
            got = dyadic_orlicz_aggregate(c, SystemSpec(SystemKind.TRIG, 16), (n, n), plan)
            assert got == pytest.approx(abs(c.coeffs[n - 1]), rel=1e-9)

    def test_zero(self):
        c = CoeffSeq([1, 0, 0, 1])
        assert dyadic_orlicz_aggregate(c, SystemSpec(SystemKind.TRIG, 4), (2, 3), SamplePlan(SampleMode.UNIFORM_GRID, 9)) == 0

    def test_rejects(self):
        c = CoeffSeq([1, 2])
        spec = SystemSpec(SystemKind.TRIG, 2)
        plan = SamplePlan(SampleMode.UNIFORM_GRID, 5)
        with pytest.raises(ValueError):
            dyadic_orlicz_aggregate(c, spec, (2, 1), plan)
        with pytest.raises(ValueError):
            dyadic_orlicz_aggregate(c, spec, (1, 3), plan)

    def test_upper_bound(self, rng):
        for _ in range(15):
            n = int(rng.integers(2, 65))
            c = CoeffSeq(rng.normal(size=n) + 1j * rng.normal(size=n))
            lo = int(rng.integers(1, n + 1))
            hi = int(rng.integers(lo, n + 1))
            for spec, plan in (
                (SystemSpec(SystemKind.TRIG, n), SamplePlan(SampleMode.RANDOM_POINTS, 32, 3)),
                (SystemSpec(SystemKind.HAAR, n), SamplePlan(SampleMode.DYADIC_MIDPOINTS, 1)),
            ):
                agg = dyadic_orlicz_aggregate(c, spec, (lo, hi), plan)
                direct = pointwise_v2_norm(c, spec, (lo, hi), plan)
                assert direct <= agg * (1 + 1e-9)
