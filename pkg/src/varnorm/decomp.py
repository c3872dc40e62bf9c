"""Interval decompositions: dyadic blocks and the mass-balanced admissible tree."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .varcore import PartialSumPath, sup_variation


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """The half-open block ``(k 2^i, (k+1) 2^i]``."""

    k: int
    i: int

    @property
    def start(self) -> int:
        return self.k << self.i

    @property
    def stop(self) -> int:
        return (self.k + 1) << self.i

    def __len__(self) -> int:
        return 1 << self.i


def binary_decompose(start: int, stop: int, levels: int) -> list[DyadicInterval]:
    """Split ``(start, stop]`` into dyadic blocks, at most two of each size.

    Walking left to right, each step takes the largest block that starts at
    the current point and still fits.  Block sizes first grow and then shrink,
    so every size occurs at most twice and there are at most ``2 * levels``
    blocks.
    """
    if not 0 <= start < stop <= (1 << levels):
        raise ValueError(f"({start}, {stop}] is not a nonempty subinterval of (0, {1 << levels}]")
    out = []
    x = start
    while x < stop:
        i = levels
        while i > 0 and (x % (1 << i) != 0 or x + (1 << i) > stop):
            i -= 1
        out.append(DyadicInterval(x >> i, i))
        x += 1 << i
    return out


@dataclass(frozen=True)
class AdmissibleInterval:
    """Node ``I_{k,s}`` of a :class:`MassTree`; ``lo``/``hi`` are 1-based, inclusive."""

    k: int
    s: int
    lo: int
    hi: int
    mass: float

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    def __contains__(self, n: int) -> bool:
        return self.lo <= n <= self.hi


class MassTree:
    """Recursive mass halving of ``[N]``.

    ``I_{0,1} = [N]``.  A nonempty node ``I_{k-1,s}`` splits into its longest
    prefix ``I_{k,2s-1}`` of mass strictly below half the node's mass, the
    next point ``i_{k,s}``, and the remainder ``I_{k,2s}``, whose mass is then
    at most half.  Hence ``M(I_{k,s}) <= 2^-k``.  A zero-mass node splits at
    its leftmost point.  Every index ends up as exactly one splitter.
    """

    def __init__(self, weights: Sequence[float] | np.ndarray):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.shape[0] == 0:
            raise ValueError("weights must be a nonempty vector")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        total = float(w.sum())
        if total <= 0:
            raise ValueError("at least one weight must be positive")
        self.n = w.shape[0]
        self.normalization = total
        self.weights = w / total
        self._cum = np.concatenate([[0.0], np.cumsum(self.weights)])
        self.intervals: dict[tuple[int, int], AdmissibleInterval] = {}
        self.splitters: dict[tuple[int, int], int] = {}
        self.point_level = np.zeros(self.n + 1, dtype=np.int64)
        self.point_key: list[tuple[int, int] | None] = [None] * (self.n + 1)
        self._build()

    def mass(self, lo: int, hi: int) -> float:
        if hi < lo:
            return 0.0
        return float(self._cum[hi] - self._cum[lo - 1])

    def _build(self) -> None:
        stack = [(0, 1, 1, self.n)]
        while stack:
            k, s, lo, hi = stack.pop()
            if hi < lo:
                continue
            m = self.mass(lo, hi)
            self.intervals[(k, s)] = AdmissibleInterval(k, s, lo, hi, m)
            # longest prefix [lo, cut] with mass < m/2
            target = self._cum[lo - 1] + 0.5 * m
            cut = int(np.searchsorted(self._cum, target, side="left")) - 1
            cut = min(max(cut, lo - 1), hi - 1)
            while cut >= lo and self.mass(lo, cut) >= 0.5 * m:
                cut -= 1
            point = cut + 1
            self.splitters[(k + 1, s)] = point
            self.point_level[point] = k + 1
            self.point_key[point] = (k + 1, s)
            stack.append((k + 1, 2 * s - 1, lo, cut))
            stack.append((k + 1, 2 * s, point + 1, hi))

    @property
    def depth(self) -> int:
        return max(k for k, _ in self.intervals)

    def levels(self) -> dict[int, list[AdmissibleInterval]]:
        out: dict[int, list[AdmissibleInterval]] = {}
        for node in sorted(self.intervals.values(), key=lambda a: (a.k, a.lo)):
            out.setdefault(node.k, []).append(node)
        return out

    def node(self, k: int, s: int) -> AdmissibleInterval | None:
        return self.intervals.get((k, s))

    def __iter__(self) -> Iterator[AdmissibleInterval]:
        return iter(self.intervals.values())


def build_mass_tree(weights: Sequence[float] | np.ndarray) -> MassTree:
    return MassTree(weights)


@dataclass(frozen=True)
class IntervalCover:
    left: AdmissibleInterval | None
    point: int
    right: AdmissibleInterval | None

    @property
    def lo(self) -> int:
        return self.left.lo if self.left else self.point

    @property
    def hi(self) -> int:
        return self.right.hi if self.right else self.point

    def mass(self, tree: MassTree) -> float:
        return tree.mass(self.lo, self.hi)


def cover_interval(tree: MassTree, lo: int, hi: int) -> IntervalCover:
    """Cover ``J = [lo, hi]`` by admissible pieces left + point + right, M(cover) <= 2 M(J).

    The point is the unique splitter of minimal level inside ``J``.  Each side
    is the deepest admissible interval sharing its inner endpoint with the
    point that still contains the corresponding part of ``J``.
    """
    if hi < lo:
        raise ValueError("J must be nonempty")
    if lo < 1 or hi > tree.n:
        raise ValueError(f"[{lo}, {hi}] is not inside [1, {tree.n}]")
    levels = tree.point_level[lo : hi + 1]
    point = lo + int(np.argmin(levels))
    key = tree.point_key[point]
    assert key is not None
    k, s = key

    left = None
    if lo < point:
        kk, ss = k, 2 * s - 1
        left = tree.node(kk, ss)
        assert left is not None and left.lo <= lo
        while True:
            child = tree.node(kk + 1, 2 * ss)
            if child is None or child.lo > lo:
                break
            kk, ss, left = kk + 1, 2 * ss, child

    right = None
    if point < hi:
        kk, ss = k, 2 * s
        right = tree.node(kk, ss)
        assert right is not None and right.hi >= hi
        while True:
            child = tree.node(kk + 1, 2 * ss - 1)
            if child is None or child.hi < hi:
                break
            kk, ss, right = kk + 1, 2 * ss - 1, child

    return IntervalCover(left, point, right)


class Label(str, enum.Enum):
    GOOD = "GOOD"
    BAD = "BAD"


def classify_good_bad(
    tree: MassTree, path: PartialSumPath, B: float, n: int | None = None
) -> dict[tuple[int, int], Label]:
    """GOOD iff (max subinterval sum inside the node)^2 <= B * M(node) * ln ln N."""
    n = tree.n if n is None else n
    if path.n != tree.n or n != tree.n:
        raise ValueError(f"path length {path.n} does not match tree size {tree.n}")
    if n < 16:
        raise ValueError("classification needs N >= 16 so that ln ln N > 0")
    if B <= 0:
        raise ValueError("B must be positive")
    scale = B * math.log(math.log(n))
    out = {}
    for key, node in tree.intervals.items():
        s = sup_variation(path.segment(node.lo - 1, node.hi)).value
        out[key] = Label.GOOD if s * s <= scale * node.mass else Label.BAD
    return out
