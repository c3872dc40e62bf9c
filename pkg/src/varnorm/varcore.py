"""p-variation of finite complex paths.

For increments ``a_1..a_N`` with partial sums ``S_0 = 0, S_m = a_1 + ... + a_m``
the p-variation is

    ||a||_{V^p} = sup ( sum_I |sum_{n in I} a_n|^p )^{1/p}

over families of disjoint subintervals of [N].  Covering partitions and
arbitrary disjoint families give the same supremum: the gaps of a family only
add nonnegative terms once they are filled in.  We therefore work with
breakpoint lists ``0 = n_0 < n_1 < ... < n_K = N`` and the recursion

    V(j)^p = max_{0 <= i < j} V(i)^p + |S_j - S_i|^p,   V(0) = 0.

Ties between optimal partitions are broken towards fewer breakpoints and then
the lexicographically smallest breakpoint list.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels

BRUTE_FORCE_MAX_N = 20


class Method(str, enum.Enum):
    EXACT_DP = "EXACT_DP"
    BRUTE_FORCE = "BRUTE_FORCE"
    DYADIC_UPPER = "DYADIC_UPPER"
    EXTREMA_PRUNED = "EXTREMA_PRUNED"
    LACUNARY = "LACUNARY"
    BLOCK_L = "BLOCK_L"
    BLOCK_S = "BLOCK_S"
    SUP = "SUP"


class BlockMode(str, enum.Enum):
    BLOCK_LEVEL = "BLOCK_LEVEL"
    WITHIN_BLOCK = "WITHIN_BLOCK"


@dataclass(frozen=True)
class PartialSumPath:
    """Partial sums ``S_0 = 0, S_1, ..., S_N`` at one sample point."""

    sums: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.sums, dtype=np.complex128)
        if s.ndim != 1 or s.shape[0] == 0:
            raise ValueError("a path needs at least S_0")
        if s[0] != 0:
            raise ValueError("S_0 must be 0")
        if not np.all(np.isfinite(s)):
            raise ValueError("path contains non-finite values")
        object.__setattr__(self, "sums", s)

    @property
    def n(self) -> int:
        return self.sums.shape[0] - 1

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.sums)

    def is_real(self) -> bool:
        return bool(np.all(self.sums.imag == 0.0))

    def segment(self, start: int, stop: int) -> "PartialSumPath":
        """Path of the increments ``a_{start+1}..a_{stop}`` re-based at 0."""
        s = self.sums[start : stop + 1]
        return PartialSumPath(s - s[0])


@dataclass(frozen=True)
class VariationResult:
    value: float
    p: float  # math.inf for the sup functional
    breakpoints: tuple[int, ...] = field(default=())
    method: Method = Method.EXACT_DP


def prefix_path(increments: Iterable[complex] | np.ndarray) -> PartialSumPath:
    if not isinstance(increments, np.ndarray):
        increments = list(increments)
    a = np.asarray(increments, dtype=np.complex128)
    if a.ndim != 1:
        raise ValueError("increments must be one-dimensional")
    if not np.all(np.isfinite(a)):
        raise ValueError("increments must be finite")
    sums = np.empty(a.shape[0] + 1, dtype=np.complex128)
    sums[0] = 0.0
    np.cumsum(a, out=sums[1:])
    return PartialSumPath(sums)


def _as_path(path: PartialSumPath | Sequence[complex] | np.ndarray) -> PartialSumPath:
    if isinstance(path, PartialSumPath):
        return path
    return prefix_path(path)


def _check_p(p: float) -> float:
    p = float(p)
    if not math.isfinite(p):
        raise ValueError("finite-p kernels reject p = inf; use sup_variation")
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    return p


def evaluate_partition(path: PartialSumPath, breakpoints: Sequence[int], p: float) -> float:
    """(sum_l |S_{n_l} - S_{n_{l-1}}|^p)^{1/p} for the given breakpoints."""
    s = path.sums[np.asarray(breakpoints, dtype=np.int64)]
    if s.shape[0] < 2:
        return 0.0
    d = np.abs(np.diff(s))
    return float(np.sum(d**p) ** (1.0 / p))


def variation_exact(path: PartialSumPath, p: float = 2.0) -> VariationResult:
    """Exact p-variation with the maximising breakpoints, O(N^2)."""
    path = _as_path(path)
    p = _check_p(p)
    n = path.n
    if n == 0:
        return VariationResult(0.0, p, (0,), Method.EXACT_DP)
    total, nxt = _kernels.dp_backward(path.sums.real.copy(), path.sums.imag.copy(), p)
    bps = [0]
    while bps[-1] != n:
        bps.append(int(nxt[bps[-1]]))
    return VariationResult(float(total) ** (1.0 / p), p, tuple(bps), Method.EXACT_DP)


def variation_value(path: PartialSumPath, p: float = 2.0) -> float:
    """Value-only exact p-variation via pruned search; much faster on long paths."""
    path = _as_path(path)
    p = _check_p(p)
    if path.n == 0:
        return 0.0
    v = _kernels.dp_value(path.sums.real.copy(), path.sums.imag.copy(), p)
    return float(v) ** (1.0 / p)


@functools.lru_cache(maxsize=None)
def _brute_force_masks(n: int) -> np.ndarray:
    # one row per subset of the interior points 1..n-1
    rows = np.array(list(itertools.product((False, True), repeat=n - 1)), dtype=bool)
    rows = rows.reshape(2 ** (n - 1), n - 1)
    rows.setflags(write=False)
    return rows


def variation_bruteforce(path: PartialSumPath, p: float = 2.0) -> VariationResult:
    """Enumerates all 2^(N-1) breakpoint sets.  Independent oracle for the DP."""
    path = _as_path(path)
    p = _check_p(p)
    n = path.n
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force limited to N <= {BRUTE_FORCE_MAX_N}, got {n}")
    if n == 0:
        return VariationResult(0.0, p, (0,), Method.BRUTE_FORCE)
    masks = _brute_force_masks(n)
    s = path.sums
    m = masks.shape[0]
    last = np.zeros(m, dtype=np.complex128)
    total = np.zeros(m)
    for j in range(1, n + 1):
        cut = masks[:, j - 1] if j < n else np.ones(m, dtype=bool)
        d = np.abs(s[j] - last[cut]) ** p
        total[cut] += d
        last[cut] = s[j]
    best = total.max()
    ties = np.flatnonzero(total == best)
    candidates = []
    for t in ties:
        interior = [k + 1 for k in np.flatnonzero(masks[t])]
        candidates.append((len(interior), [0, *interior, n]))
    candidates.sort()
    bps = tuple(candidates[0][1])
    return VariationResult(float(best) ** (1.0 / p), p, bps, Method.BRUTE_FORCE)


def sup_variation(path: PartialSumPath) -> VariationResult:
    """max over subintervals I of |S_I|; between max_m |S_m| and twice that."""
    path = _as_path(path)
    if path.n == 0:
        return VariationResult(0.0, math.inf, (0,), Method.SUP)
    d, a, b = _kernels.diameter(path.sums.real.copy(), path.sums.imag.copy())
    return VariationResult(float(d), math.inf, (int(a), int(b)), Method.SUP)


def dyadic_upper_bound(path: PartialSumPath) -> float:
    """sum_i sqrt(sum_k |block sum over (k 2^i, (k+1) 2^i]|^2) after zero-padding to 2^l.

    Every interval splits into dyadic blocks with at most two per size, so
    ``variation_exact(path, 2) <= sqrt(2) * dyadic_upper_bound(path)``.
    """
    path = _as_path(path)
    return float(dyadic_levels(path.increments[None, :]).sum(axis=1)[0])


def dyadic_levels(increments: np.ndarray) -> np.ndarray:
    """Per-level terms sqrt(sum_k |block|^2) for a batch of increment rows.

    Returns an array of shape ``(rows, l + 1)``; column ``i`` is level ``i``.
    """
    a = np.atleast_2d(np.asarray(increments, dtype=np.complex128))
    rows, n = a.shape
    if n == 0:
        return np.zeros((rows, 1))
    levels = max(0, math.ceil(math.log2(n))) if n > 1 else 0
    size = 1 << levels
    if size != n:
        a = np.concatenate([a, np.zeros((rows, size - n), dtype=a.dtype)], axis=1)
    out = np.empty((rows, levels + 1))
    blocks = a
    for i in range(levels + 1):
        out[:, i] = np.sqrt(np.sum(np.abs(blocks) ** 2, axis=1))
        if i < levels:
            blocks = blocks[:, 0::2] + blocks[:, 1::2]
    return out


def lacunary_increments(path: PartialSumPath) -> np.ndarray:
    """S_1, S_2 - S_1, S_4 - S_2, ...; a final S_N - S_{2^k} when N is not a power of 2."""
    path = _as_path(path)
    n = path.n
    if n == 0:
        return np.zeros(0, dtype=np.complex128)
    idx = [0]
    m = 1
    while m <= n:
        idx.append(m)
        m *= 2
    if idx[-1] != n:
        idx.append(n)
    return np.diff(path.sums[idx])


def lacunary_variation(path: PartialSumPath, p: float = 2.0) -> VariationResult:
    lac = lacunary_increments(path)
    res = variation_exact(prefix_path(lac), p)
    return VariationResult(res.value, res.p, res.breakpoints, Method.LACUNARY)


def _check_blocks(n: int, blocks: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    blocks = [(int(a), int(b)) for a, b in blocks]
    expect = 1
    for a, b in blocks:
        if a != expect or b < a:
            raise ValueError(f"blocks must be consecutive runs covering [1, {n}]; bad block ({a}, {b})")
        expect = b + 1
    if expect != n + 1:
        raise ValueError(f"blocks cover [1, {expect - 1}], expected [1, {n}]")
    return blocks


def restricted_variation(
    path: PartialSumPath,
    blocks: Sequence[tuple[int, int]],
    mode: BlockMode | str,
    p: float = 2.0,
) -> VariationResult:
    """Variation restricted to whole blocks (BLOCK_LEVEL) or to pieces inside one block.

    ``blocks`` are 1-based inclusive ``(first, last)`` index pairs.
    """
    path = _as_path(path)
    mode = BlockMode(mode)
    blocks = _check_blocks(path.n, blocks)
    if mode is BlockMode.BLOCK_LEVEL:
        ends = [0] + [b for _, b in blocks]
        coarse = PartialSumPath(path.sums[ends])
        res = variation_exact(coarse, p)
        bps = tuple(ends[k] for k in res.breakpoints)
        return VariationResult(res.value, res.p, bps, Method.BLOCK_L)
    total = 0.0
    bps: list[int] = [0]
    for a, b in blocks:
        res = variation_exact(path.segment(a - 1, b), p)
        total += res.value**p
        bps.extend(a - 1 + k for k in res.breakpoints[1:])
    return VariationResult(total ** (1.0 / p), p, tuple(bps), Method.BLOCK_S)


def extrema_candidates(path: PartialSumPath) -> np.ndarray:
    path = _as_path(path)
    if not path.is_real():
        raise ValueError("extrema pruning needs real increments")
    return _kernels.real_extrema(path.sums.real.copy())


def extrema_pruned_variation(path: PartialSumPath, p: float = 2.0) -> VariationResult:
    """Exact DP restricted to the turning points of a real path (plus endpoints)."""
    path = _as_path(path)
    p = _check_p(p)
    cand = extrema_candidates(path)
    if path.n == 0:
        return VariationResult(0.0, p, (0,), Method.EXTREMA_PRUNED)
    sub = PartialSumPath(path.sums[cand])
    res = variation_exact(sub, p)
    bps = tuple(int(cand[k]) for k in res.breakpoints)
    return VariationResult(res.value, p, bps, Method.EXTREMA_PRUNED)


def extrema_pruned_value(path: PartialSumPath, p: float = 2.0) -> float:
    """Value-only counterpart of :func:`extrema_pruned_variation`."""
    path = _as_path(path)
    p = _check_p(p)
    cand = extrema_candidates(path)
    if cand.shape[0] < 2:
        return 0.0
    v = _kernels.dp_value(path.sums.real[cand].copy(), np.zeros(cand.shape[0]), p)
    return float(v) ** (1.0 / p)


def dyadic_maximal_sum(path: PartialSumPath) -> float:
    """sum over dyadic blocks I of (max subinterval sum inside I)^2.

    The square variation is at most 4 times this: each interval of a
    partition splits at its most divisible point into two pieces, each
    covering at least half of a dyadic block, and a block can be used by at
    most two disjoint intervals.
    """
    path = _as_path(path)
    n = path.n
    if n == 0:
        return 0.0
    size = 1 << max(0, math.ceil(math.log2(n)))
    sums = np.concatenate([path.sums, np.full(size - n, path.sums[-1])])
    re = sums.real.copy()
    im = sums.imag.copy()
    total = 0.0
    width = 1
    while width <= size:
        for start in range(0, size, width):
            d, _, _ = _kernels.diameter(re[start : start + width + 1], im[start : start + width + 1])
            total += d * d
        width *= 2
    return total
