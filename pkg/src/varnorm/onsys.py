"""Orthonormal systems, sample plans and quadrature estimates of L^2(V^p) norms.

Coefficients live in a :class:`CoeffSeq`.  Besides the values it carries a
``basis`` of integer labels, one per position, naming the basis function that
position multiplies.  Rearranging a series permutes coefficients and labels
together, so a rearranged trigonometric series still pairs ``a_n`` with its
own frequency.

Label conventions:

* TRIG: label ``m`` is the exponential ``e^{2 pi i m x}``.
* HAAR: label ``m`` is ``H_{m-1}``; ``H_0 = 1`` and ``H_n = H_{k,j}`` for
  ``n = 2^k + j - 1`` with ``1 <= j <= 2^k``.  ``H_{k,j}`` is ``+2^{k/2}`` on
  the left half and ``-2^{k/2}`` on the right half of
  ``((j-1) 2^-k, j 2^-k)``.  A ``haar_order`` overlay on the system replaces
  ``m - 1`` by ``haar_order[m - 1]``.
* RADEMACHER: label ``m`` is ``r_m(x) = sign sin(2^m pi x)``.
* INDEP_BOUNDED / GAUSSIAN_COEFF: label ``m`` is the m-th variable of an
  i.i.d. sequence; there is no underlying x.
"""

from __future__ import annotations

import csv
import enum
import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .varcore import (
    Method,
    PartialSumPath,
    dyadic_upper_bound,
    extrema_pruned_value,
    lacunary_variation,
    prefix_path,
    sup_variation,
    variation_value,
)

# r_n(x) needs the n-th binary digit of x; doubles carry 52 fraction bits
RADEMACHER_ANALYTIC_MAX = 52
DYADIC_MIDPOINTS_MAX_LEVEL = 24
GEOMETRIC_FLOOR = 2.0**-20


@dataclass(frozen=True)
class CoeffSeq:
    coeffs: np.ndarray
    basis: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        a = np.asarray(self.coeffs, dtype=np.complex128).reshape(-1)
        if not np.all(np.isfinite(a)):
            raise ValueError("coefficients must be finite")
        if self.basis is None:
            b = np.arange(1, a.shape[0] + 1, dtype=np.int64)
        else:
            b = np.asarray(self.basis, dtype=np.int64).reshape(-1)
            if b.shape != a.shape:
                raise ValueError(f"basis has {b.shape[0]} labels for {a.shape[0]} coefficients")
            if b.size and b.min() < 1:
                raise ValueError("basis labels are 1-based")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "coeffs", a)
        object.__setattr__(self, "basis", b)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    def __len__(self) -> int:
        return self.n

    @property
    def masses(self) -> np.ndarray:
        return np.abs(self.coeffs) ** 2

    @property
    def total_mass(self) -> float:
        return math.fsum(self.masses.tolist())

    def mass(self, lo: int, hi: int) -> float:
        """Sum of |a_n|^2 over the 1-based inclusive range [lo, hi]."""
        return math.fsum(self.masses[lo - 1 : hi].tolist())

    def scaled(self, c: complex) -> "CoeffSeq":
        return CoeffSeq(self.coeffs * c, self.basis)


def dirichlet_coeffs(n: int, normalize: bool = True) -> CoeffSeq:
    if n < 1:
        raise ValueError("N must be >= 1")
    value = 1.0 / math.sqrt(n) if normalize else 1.0
    return CoeffSeq(np.full(n, value, dtype=np.complex128))


def flat_coeffs(n: int) -> CoeffSeq:
    return dirichlet_coeffs(n, normalize=True)


def read_coeff_csv(path: str | os.PathLike) -> CoeffSeq:
    """Read ``index,re,im`` rows with 1-based contiguous indices."""
    rows = []
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["index", "re", "im"]:
                raise ValueError(f"{path}: header must be 'index,re,im'")
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != 3:
                    raise ValueError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
                try:
                    idx = int(row[0])
                    re_, im_ = float(row[1]), float(row[2])
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
                if idx != len(rows) + 1:
                    raise ValueError(f"{path}:{lineno}: index {idx}, expected {len(rows) + 1}")
                rows.append(complex(re_, im_))
    except OSError as exc:
        raise OSError(f"cannot read coefficient file {path}: {exc.strerror}") from exc
    if not rows:
        raise ValueError(f"{path}: no coefficients")
    return CoeffSeq(np.array(rows))


def write_coeff_csv(coeffs: CoeffSeq, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "re", "im"])
        for i, a in enumerate(coeffs.coeffs, start=1):
            w.writerow([i, repr(float(a.real)), repr(float(a.imag))])


class SystemKind(str, enum.Enum):
    TRIG = "TRIG"
    HAAR = "HAAR"
    RADEMACHER = "RADEMACHER"
    INDEP_BOUNDED = "INDEP_BOUNDED"
    GAUSSIAN_COEFF = "GAUSSIAN_COEFF"


class SampleMode(str, enum.Enum):
    UNIFORM_GRID = "UNIFORM_GRID"
    RANDOM_POINTS = "RANDOM_POINTS"
    DYADIC_MIDPOINTS = "DYADIC_MIDPOINTS"
    COIN_FLIPS = "COIN_FLIPS"


_COMPATIBLE = {
    SystemKind.TRIG: {SampleMode.UNIFORM_GRID, SampleMode.RANDOM_POINTS},
    SystemKind.HAAR: {SampleMode.DYADIC_MIDPOINTS, SampleMode.RANDOM_POINTS},
    SystemKind.RADEMACHER: {SampleMode.COIN_FLIPS, SampleMode.RANDOM_POINTS, SampleMode.DYADIC_MIDPOINTS},
    SystemKind.INDEP_BOUNDED: {SampleMode.COIN_FLIPS},
    SystemKind.GAUSSIAN_COEFF: {SampleMode.RANDOM_POINTS},
}


@dataclass(frozen=True)
class SystemSpec:
    kind: SystemKind
    n: int
    C: float | None = None
    haar_order: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SystemKind(self.kind))
        if self.n < 1:
            raise ValueError("N must be >= 1")
        if self.kind is SystemKind.INDEP_BOUNDED:
            c = 1.0 if self.C is None else float(self.C)
            if not c >= 1.0:
                raise ValueError(f"C must be >= 1, got {self.C}")
            object.__setattr__(self, "C", c)
        elif self.C is not None:
            raise ValueError(f"C only applies to INDEP_BOUNDED, not {self.kind.value}")
        if self.haar_order is not None:
            if self.kind is not SystemKind.HAAR:
                raise ValueError("haar_order only applies to HAAR")
            order = tuple(int(h) for h in self.haar_order)
            if len(order) < self.n or min(order) < 0 or len(set(order)) != len(order):
                raise ValueError("haar_order must list at least N distinct nonnegative Haar indices")
            object.__setattr__(self, "haar_order", order)

    def real_valued(self) -> bool:
        return self.kind is not SystemKind.TRIG

    def check_plan(self, plan: "SamplePlan") -> None:
        if plan.mode not in _COMPATIBLE[self.kind]:
            allowed = ", ".join(sorted(m.value for m in _COMPATIBLE[self.kind]))
            raise ValueError(f"sample mode {plan.mode.value} does not fit {self.kind.value} (use {allowed})")


@dataclass(frozen=True)
class SamplePlan:
    """Quadrature / sampling rule.

    ``strata`` only affects RANDOM_POINTS on TRIG: ``"uniform"`` draws one
    point per strip of width 1/count, ``"geometric"`` uses strips whose
    widths grow geometrically away from x = 0 (and mirrored towards 1), which
    resolves the peak of kernels concentrated near the origin.
    """

    mode: SampleMode = SampleMode.RANDOM_POINTS
    count: int = 64
    seed: int = 0
    strata: str = "uniform"

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", SampleMode(self.mode))
        if self.count < 1:
            raise ValueError("count must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.strata not in ("uniform", "geometric"):
            raise ValueError(f"unknown strata {self.strata!r}")
        if self.strata == "geometric" and (self.count < 4 or self.count % 2):
            raise ValueError("geometric strata need an even count >= 4")

    def rng(self, *key: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=tuple(key)))


# --- basis functions -----------------------------------------------------------


def _check_x(x: np.ndarray, level: int, what: str) -> None:
    scaled = x * float(2**level)
    if np.any((x <= 0) | (x >= 1)) or np.any(scaled == np.floor(scaled)):
        raise ValueError(f"x hits a dyadic breakpoint of {what} at resolution 2^-{level}")


def trig_values(labels: np.ndarray, x: np.ndarray) -> np.ndarray:
    """e^{2 pi i m x}, shape (len(x), len(labels)); phases reduced mod 1 first."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    phase = np.mod(np.outer(x, np.asarray(labels, dtype=float)), 1.0)
    return np.exp(2j * np.pi * phase)


def haar_level(n: int | np.ndarray) -> np.ndarray:
    n = np.asarray(n, dtype=np.int64)
    out = np.zeros_like(n)
    pos = n > 0
    out[pos] = np.floor(np.log2(n[pos])).astype(np.int64)
    # guard against log2 rounding at exact powers of two
    out[pos] -= (1 << out[pos]) > n[pos]
    out[pos] += (1 << (out[pos] + 1)) <= n[pos]
    return out


def haar_kj(n: int) -> tuple[int, int]:
    """(k, j) with H_n = H_{k,j}; n >= 1."""
    if n < 1:
        raise ValueError("H_0 has no (k, j) label")
    k = int(n).bit_length() - 1  # exact for arbitrarily large indices
    return k, n - (1 << k) + 1


def haar_index(k: int, j: int) -> int:
    if k < 0 or not 1 <= j <= (1 << k):
        raise ValueError(f"no Haar function H_({k},{j})")
    return (1 << k) + j - 1


def haar_support(n: int) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    k, j = haar_kj(n)
    return (j - 1) / 2**k, j / 2**k


def haar_values(indices: np.ndarray, x: np.ndarray, check: bool = True) -> np.ndarray:
    """H_n(x), shape (len(x), len(indices))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    idx = np.asarray(indices, dtype=np.int64)
    k = haar_level(idx)
    if check and idx.size:
        _check_x(x, int(k.max()) + 1, "the Haar functions")
    j0 = idx - (1 << k)  # 0-based position inside level k
    scale = np.exp2(k.astype(float))
    t = np.outer(x, scale) - j0  # position relative to the support, in units of the support
    inside = (t > 0) & (t < 1)
    sign = np.where(t < 0.5, 1.0, -1.0)
    out = np.where(inside, sign * np.sqrt(scale), 0.0)
    out[:, idx == 0] = 1.0
    return out


def haar_value(n: int, x: float) -> float:
    return float(haar_values(np.array([n]), np.array([x]))[0, 0])


def rademacher_values(labels: np.ndarray, x: np.ndarray, check: bool = True) -> np.ndarray:
    """r_m(x) = 1 - 2 * (floor(2^m x) mod 2), shape (len(x), len(labels))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and labels.max() > RADEMACHER_ANALYTIC_MAX:
        raise ValueError(
            f"analytic Rademacher functions need r_m with m <= {RADEMACHER_ANALYTIC_MAX} in double precision; use COIN_FLIPS"
        )
    if check and labels.size:
        _check_x(x, int(labels.max()), "the Rademacher functions")
    digits = np.floor(np.outer(x, np.exp2(labels.astype(float)))) % 2
    return 1.0 - 2.0 * digits


def rademacher_value(m: int, x: float) -> float:
    return float(rademacher_values(np.array([m]), np.array([x]))[0, 0])


def haar_indices(system: SystemSpec, coeffs: CoeffSeq) -> np.ndarray:
    if system.haar_order is not None:
        order = np.asarray(system.haar_order, dtype=np.int64)
        if coeffs.basis.max(initial=0) > order.shape[0]:
            raise ValueError("basis labels exceed the haar_order overlay")
        return order[coeffs.basis - 1]
    return coeffs.basis - 1


def trig_path(coeffs: CoeffSeq, x: float) -> PartialSumPath:
    return prefix_path(coeffs.coeffs * trig_values(coeffs.basis, np.array([x]))[0])


def haar_path(coeffs: CoeffSeq, x: float, system: SystemSpec | None = None) -> PartialSumPath:
    system = system or SystemSpec(SystemKind.HAAR, max(1, coeffs.n))
    idx = haar_indices(system, coeffs)
    return prefix_path(coeffs.coeffs * haar_values(idx, np.array([x]))[0])


def rademacher_path(
    coeffs: CoeffSeq, signs: Sequence[int] | np.ndarray | None = None, x: float | None = None
) -> PartialSumPath:
    if (signs is None) == (x is None):
        raise ValueError("give exactly one of signs or x")
    if signs is not None:
        # signs[m - 1] is the value of r_m
        eps = np.asarray(signs, dtype=float).reshape(-1)
        if eps.shape[0] < coeffs.basis.max(initial=0):
            raise ValueError(f"need {int(coeffs.basis.max())} signs, got {eps.shape[0]}")
        if not np.all(np.abs(eps) == 1):
            raise ValueError("signs must be +-1")
        return prefix_path(coeffs.coeffs * eps[coeffs.basis - 1])
    return prefix_path(coeffs.coeffs * rademacher_values(coeffs.basis, np.array([x]))[0])


def haar_conditional_expectation(values: Sequence[float] | np.ndarray, k: int) -> np.ndarray:
    """Block averages over the 2^k dyadic intervals of level k.

    ``values`` are the function on the midpoints of a dyadic grid of length
    ``2^m`` with ``m >= k``.
    """
    v = np.asarray(values, dtype=float)
    m = v.shape[0]
    if m == 0 or m & (m - 1):
        raise ValueError("grid length must be a power of two")
    if k < 0 or (1 << k) > m:
        raise ValueError(f"level {k} is finer than the grid of {m} cells")
    blocks = v.reshape(1 << k, -1)
    return np.repeat(blocks.mean(axis=1), m >> k)


# --- sampling ------------------------------------------------------------------


@dataclass(frozen=True)
class Samples:
    """Basis-function values at the quadrature nodes, with their weights."""

    values: np.ndarray  # (count, N)
    weights: np.ndarray  # (count,), sums to 1
    strata_pairs: bool  # stratified design: use collapsed-strata errors
    random: bool


def _trig_points(plan: SamplePlan, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    c = plan.count
    if plan.mode is SampleMode.UNIFORM_GRID:
        return np.arange(c) / c, np.full(c, 1.0 / c)
    if plan.strata == "uniform":
        return (np.arange(c) + rng.random(c)) / c, np.full(c, 1.0 / c)
    half = c // 2
    edges = np.concatenate([[0.0], np.geomspace(GEOMETRIC_FLOOR, 0.5, half)])
    width = np.diff(edges)
    left = edges[:-1] + width * rng.random(half)
    right = 1.0 - (edges[:-1] + width * rng.random(half))
    return np.concatenate([left, right]), np.concatenate([width, width])


def _dyadic_level(system: SystemSpec, coeffs: CoeffSeq, plan: SamplePlan) -> int:
    """Cell level so that every function in use is constant on each cell."""
    if system.kind is SystemKind.HAAR:
        idx = haar_indices(system, coeffs)
        need = int(haar_level(idx).max()) + 1 if idx.size else 0
    else:
        need = int(coeffs.basis.max(initial=0))
    level = max(need, math.ceil(math.log2(plan.count)) if plan.count > 1 else 0)
    if level > DYADIC_MIDPOINTS_MAX_LEVEL:
        raise ValueError(f"dyadic midpoint grid would need 2^{level} cells")
    return level


def sample_basis(system: SystemSpec, coeffs: CoeffSeq, plan: SamplePlan, *key: int) -> Samples:
    """Evaluate the basis functions for every position of ``coeffs`` at the plan's nodes.

    Random draws come from ``plan.rng(*key)``.  For COIN_FLIPS and Gaussian
    draws each row is generated from its own stream and reads the first N
    values, so a row at size N is a prefix of the same row at any larger size.
    """
    system.check_plan(plan)
    labels = coeffs.basis
    c = plan.count
    kind = system.kind
    if plan.mode is SampleMode.DYADIC_MIDPOINTS:
        level = _dyadic_level(system, coeffs, plan)
        cells = 1 << level
        x = (np.arange(cells) + 0.5) / cells
        weights = np.full(cells, 1.0 / cells)
        if kind is SystemKind.HAAR:
            vals = haar_values(haar_indices(system, coeffs), x, check=False)
        else:
            vals = rademacher_values(labels, x, check=False)
        return Samples(vals, weights, False, False)

    if kind is SystemKind.TRIG:
        x, weights = _trig_points(plan, plan.rng(*key))
        random = plan.mode is SampleMode.RANDOM_POINTS
        return Samples(trig_values(labels, x), weights, random, random)

    weights = np.full(c, 1.0 / c)
    if kind in (SystemKind.HAAR, SystemKind.RADEMACHER) and plan.mode is SampleMode.RANDOM_POINTS:
        x = plan.rng(*key).random(c)
        if kind is SystemKind.HAAR:
            vals = haar_values(haar_indices(system, coeffs), x)
        else:
            vals = rademacher_values(labels, x)
        return Samples(vals, weights, False, True)

    top = int(labels.max(initial=0))
    raw = np.empty((c, top))
    for row in range(c):
        rng = plan.rng(*key, row)
        if kind is SystemKind.GAUSSIAN_COEFF:
            raw[row] = rng.standard_normal(top)
        else:
            u = rng.random(top)
            if kind is SystemKind.RADEMACHER:
                raw[row] = np.where(u < 0.5, 1.0, -1.0)
            else:
                q = 1.0 / (2.0 * system.C**2)
                raw[row] = np.where(u < q, system.C, np.where(u < 2 * q, -system.C, 0.0))
    return Samples(raw[:, labels - 1], weights, False, True)


# --- L^2(V^p) estimation -------------------------------------------------------


class Variant(str, enum.Enum):
    FULL = "FULL"
    LACUNARY = "LACUNARY"
    SUP = "SUP"
    DYADIC_UPPER = "DYADIC_UPPER"


@dataclass(frozen=True)
class NormEstimate:
    value: float
    stderr: float
    per_sample: np.ndarray  # pointwise functional at each node
    weights: np.ndarray

    @property
    def squared(self) -> float:
        return self.value**2


def pointwise_functional(
    increments: np.ndarray, variant: Variant | str, p: float = 2.0, method: Method | str | None = None
) -> float:
    """The chosen variation functional of one increment row."""
    variant = Variant(variant)
    inc = np.asarray(increments)
    if variant is Variant.LACUNARY:
        return lacunary_variation(prefix_path(inc), p).value
    if variant is Variant.DYADIC_UPPER:
        return dyadic_upper_bound(prefix_path(inc))
    # zero increments never change an interval sum, so they can be dropped
    path = prefix_path(inc[inc != 0])
    if variant is Variant.SUP:
        return sup_variation(path).value
    method = None if method is None else Method(method)
    real = not np.iscomplexobj(inc) or bool(np.all(inc.imag == 0))
    if method is Method.EXTREMA_PRUNED or (method is None and real):
        if not real:
            raise ValueError("EXTREMA_PRUNED needs real increments")
        return extrema_pruned_value(PartialSumPath(path.sums.real.astype(np.complex128)), p)
    if method not in (None, Method.EXACT_DP):
        raise ValueError(f"method {method.value} cannot evaluate the FULL variant")
    return variation_value(path, p)


def weighted_mean_stderr(y: np.ndarray, weights: np.ndarray, stratified: bool, random: bool) -> tuple[float, float]:
    """Weighted mean and its standard error.

    Stratified designs (one draw per stratum) use the collapsed-strata
    estimator on adjacent pairs; plain random samples use the i.i.d. formula;
    deterministic rules report 0.
    """
    mean = float(np.dot(weights, y))
    if not random or y.shape[0] < 2:
        return mean, 0.0
    if stratified:
        m = y.shape[0] // 2 * 2
        w1, w2 = weights[0:m:2], weights[1:m:2]
        y1, y2 = y[0:m:2], y[1:m:2]
        var = float(np.sum((w1 + w2) ** 2 * (y1 - y2) ** 2) / 4.0)
        return mean, math.sqrt(var)
    return mean, float(np.std(y, ddof=1) / math.sqrt(y.shape[0]))


def l2_vp_norm(
    system: SystemSpec,
    coeffs: CoeffSeq,
    p: float = 2.0,
    plan: SamplePlan | None = None,
    variant: Variant | str = Variant.FULL,
    method: Method | str | None = None,
    key: Sequence[int] = (),
    samples: Samples | None = None,
) -> NormEstimate:
    """sqrt of the quadrature mean of (pointwise functional)^2, with a delta-method stderr.

    Passing ``samples`` reuses basis values, e.g. to evaluate several
    orderings at the same nodes.
    """
    if p < 1 or not math.isfinite(p):
        raise ValueError(f"p must be finite and >= 1, got {p}")
    plan = plan or SamplePlan()
    if samples is None:
        samples = sample_basis(system, coeffs, plan, *key)
    inc = samples.values * coeffs.coeffs[None, :]
    if system.real_valued() and np.all(coeffs.coeffs.imag == 0):
        inc = inc.real
    y = np.array([pointwise_functional(row, variant, p, method) ** 2 for row in inc])
    mean, se = weighted_mean_stderr(y, samples.weights, samples.strata_pairs, samples.random)
    value = math.sqrt(max(mean, 0.0))
    stderr = se / (2 * value) if value > 0 else 0.0
    return NormEstimate(value, stderr, np.sqrt(y), samples.weights)


def quadrature_l2(system: SystemSpec, coeffs: CoeffSeq, plan: SamplePlan, key: Sequence[int] = ()) -> float:
    """Quadrature L^2 norm of the full partial sum S_N (a Parseval check)."""
    s = sample_basis(system, coeffs, plan, *key)
    total = s.values @ coeffs.coeffs
    return math.sqrt(float(np.dot(s.weights, np.abs(total) ** 2)))
