"""Orlicz gauges Gamma_K, gamma_K and Luxemburg norms of sampled functions."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .onsys import CoeffSeq, SamplePlan, SystemSpec, pointwise_functional, sample_basis

LUX_RTOL = 1e-10
LUX_MAX_ITER = 200


class Which(str, enum.Enum):
    BIG = "BIG"
    SMALL = "SMALL"


@dataclass(frozen=True)
class OrliczGauge:
    K: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.K) and self.K >= 1):
            raise ValueError(f"K must be a finite real >= 1, got {self.K}")

    def big(self, t: np.ndarray | float) -> np.ndarray:
        """Gamma_K: |t|^{5/2} up to K, then (5/4) K^{1/2} t^2 - (1/4) K^{5/2}."""
        a = np.abs(np.asarray(t, dtype=float))
        K = self.K
        inner = a**2.5
        outer = 1.25 * math.sqrt(K) * a**2 - 0.25 * K**2.5
        return np.where(a <= K, inner, outer)

    def small(self, t: np.ndarray | float) -> np.ndarray:
        """gamma_K: |t|^{1/2} capped at K^{1/2}."""
        a = np.abs(np.asarray(t, dtype=float))
        return np.sqrt(np.minimum(a, self.K))


def gauge_eval(g: OrliczGauge, t: np.ndarray | float, which: Which | str = Which.BIG) -> np.ndarray | float:
    which = Which(which)
    out = g.big(t) if which is Which.BIG else g.small(t)
    return float(out) if np.ndim(out) == 0 else out


def _prepare(values: Sequence[float] | np.ndarray, weights: Sequence[float] | np.ndarray | None):
    f = np.abs(np.asarray(values, dtype=np.complex128 if np.iscomplexobj(values) else float)).reshape(-1)
    if not np.all(np.isfinite(f)):
        raise ValueError("samples must be finite")
    if weights is None:
        w = np.full(f.shape[0], 1.0 / max(1, f.shape[0]))
    else:
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.shape != f.shape:
            raise ValueError(f"{w.shape[0]} weights for {f.shape[0]} samples")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
    return f, w


def luxemburg_norm(
    values: Sequence[float] | np.ndarray,
    gauge: OrliczGauge,
    weights: Sequence[float] | np.ndarray | None = None,
) -> float:
    """min { lam : sum_x w(x) Gamma_K(f(x)/lam) <= 1 } by geometric bisection.

    ``weights`` are quadrature weights (uniform 1/n by default).  The bracket
    starts at ``max|f|`` and is widened by doubling/halving until it encloses
    the root; the integral is strictly decreasing in lam wherever f is not
    identically zero.  The returned lam satisfies the constraint.
    """
    f, w = _prepare(values, weights)
    keep = (f > 0) & (w > 0)
    f, w = f[keep], w[keep]
    if f.size == 0:
        return 0.0

    def integral(lam: float) -> float:
        return float(np.dot(w, gauge.big(f / lam)))

    top = float(f.max())
    hi = top
    while integral(hi) > 1:
        hi *= 2
    lo = hi
    while integral(lo) <= 1:
        lo /= 2
        if lo < top * 1e-300:
            raise ValueError("could not bracket the Luxemburg norm")
    for _ in range(LUX_MAX_ITER):
        if hi / lo - 1 <= LUX_RTOL:
            break
        mid = math.sqrt(lo * hi)
        if integral(mid) <= 1:
            hi = mid
        else:
            lo = mid
    return hi


def dyadic_orlicz_aggregate(
    coeffs: CoeffSeq,
    system: SystemSpec,
    interval: tuple[int, int],
    plan: SamplePlan,
    key: Sequence[int] = (),
) -> float:
    """Upper estimate of || ||{a_n psi_n}_{n in I}||_{V^2} ||_{Gamma_K}, K = N/|I|.

    The segment over I is zero-padded to 2^l and split into dyadic blocks.
    Pointwise, V^2 <= F_l + sqrt(2) sum_{i<l} F_i with F_i = (sum_k |block_{k,i}|^2)^{1/2}:
    an interval of a partition uses at most two blocks of each size, and the
    top level has only one block.  The triangle inequality over levels and
    2-convexity within a level then give

        F_l norm + sqrt(2) sum_{i<l} (sum_k ||block_{k,i}||^2)^{1/2}.
    """
    lo, hi = interval
    if hi < lo:
        raise ValueError("interval must be nonempty")
    if lo < 1 or hi > coeffs.n:
        raise ValueError(f"interval [{lo}, {hi}] is not inside [1, {coeffs.n}]")
    gauge = OrliczGauge(coeffs.n / (hi - lo + 1))
    part = CoeffSeq(coeffs.coeffs[lo - 1 : hi], coeffs.basis[lo - 1 : hi])
    samples = sample_basis(system, part, plan, *key)
    inc = samples.values * part.coeffs[None, :]
    if not np.any(inc):
        return 0.0
    m = inc.shape[1]
    levels = max(0, math.ceil(math.log2(m))) if m > 1 else 0
    inc = np.concatenate([inc, np.zeros((inc.shape[0], (1 << levels) - m))], axis=1)
    total = 0.0
    blocks = inc
    for i in range(levels + 1):
        norms = [luxemburg_norm(blocks[:, k], gauge, samples.weights) for k in range(blocks.shape[1])]
        level = math.sqrt(math.fsum(v * v for v in norms))
        total += level if i == levels else math.sqrt(2) * level
        if i < levels:
            blocks = blocks[:, 0::2] + blocks[:, 1::2]
    return total


def pointwise_v2_norm(
    coeffs: CoeffSeq, system: SystemSpec, interval: tuple[int, int], plan: SamplePlan, key: Sequence[int] = ()
) -> float:
    """Luxemburg norm (K = N/|I|) of the directly computed pointwise V^2 over I."""
    lo, hi = interval
    gauge = OrliczGauge(coeffs.n / (hi - lo + 1))
    part = CoeffSeq(coeffs.coeffs[lo - 1 : hi], coeffs.basis[lo - 1 : hi])
    samples = sample_basis(system, part, plan, *key)
    inc = samples.values * part.coeffs[None, :]
    v = np.array([pointwise_functional(row, "FULL", 2.0, "EXACT_DP") for row in inc])
    return luxemburg_norm(v, gauge, samples.weights)

