"""Rearrangements of coefficient sequences.

A plan is a permutation ``pi`` of the positions (0-based internally) and an
optional sign vector.  Applying it gives ``b_n = eps_n a_{pi(n)}``, with the
basis labels carried along, so the n-th function of the new system is the
``pi(n)``-th function of the old one.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .onsys import CoeffSeq, SystemKind, SystemSpec, haar_kj


class PlanMode(str, enum.Enum):
    IDENTITY = "IDENTITY"
    UNIFORM = "UNIFORM"
    BLOCK = "BLOCK"
    SIGNS = "SIGNS"


CLASS_SNAP = 1e-12


def mass_class(w: float) -> int:
    """The j with 2^{-j-1} < w <= 2^{-j}, for 0 < w <= 1.

    Masses within a relative 1e-12 above a power of two count as that power,
    so that e.g. ``abs(sqrt(0.5))**2`` lands in the class of 1/2.
    """
    if not 0 < w <= 1 + CLASS_SNAP:
        raise ValueError(f"normalized mass must lie in (0, 1], got {w}")
    m, e = math.frexp(w)  # w = m 2^e, 0.5 <= m < 1
    return max(0, -e + (1 if m <= 0.5 * (1 + CLASS_SNAP) else 0))


def tail_cutoff(n: int) -> int:
    return math.ceil(2 * math.log(n)) if n > 1 else 0


@dataclass(frozen=True)
class BlockPartition:
    """Dyadic magnitude classes ``A_j`` (1-based indices) and the tail ``A*``."""

    n: int
    classes: dict[int, tuple[int, ...]]
    tail: tuple[int, ...]
    block_order: tuple[int, ...]
    within_order: dict[int, tuple[int, ...]]

    def __post_init__(self) -> None:
        seen = sorted(itertools.chain(self.tail, *self.classes.values()))
        if seen != list(range(1, self.n + 1)):
            raise ValueError("classes and tail must partition [N]")
        if sorted(self.block_order) != sorted(self.classes):
            raise ValueError("block_order must list every class once")
        for j, members in self.classes.items():
            if sorted(self.within_order[j]) != sorted(members):
                raise ValueError(f"within_order of class {j} is not a permutation of it")

    def sequence(self) -> list[int]:
        """Indices in plan order: classes as blocks, then the tail in natural order."""
        out: list[int] = []
        for j in self.block_order:
            out.extend(self.within_order[j])
        out.extend(sorted(self.tail))
        return out

    def blocks(self) -> list[tuple[int, int]]:
        """1-based inclusive position ranges B_j (and a final tail block), in plan order."""
        out = []
        start = 1
        for j in self.block_order:
            size = len(self.classes[j])
            out.append((start, start + size - 1))
            start += size
        if self.tail:
            out.append((start, self.n))
        return out


def dyadic_blocks(coeffs: CoeffSeq) -> BlockPartition:
    total = coeffs.total_mass
    if total <= 0:
        raise ValueError("coefficients have zero mass")
    n = coeffs.n
    cutoff = tail_cutoff(n)
    w = coeffs.masses / total
    classes: dict[int, list[int]] = {}
    tail = []
    for idx, wn in enumerate(w, start=1):
        if wn == 0:
            tail.append(idx)
            continue
        j = mass_class(float(wn))
        if j >= cutoff:
            tail.append(idx)
        else:
            classes.setdefault(j, []).append(idx)
    frozen = {j: tuple(v) for j, v in sorted(classes.items())}
    return BlockPartition(n, frozen, tuple(tail), tuple(frozen), dict(frozen))


@dataclass(frozen=True, eq=False)
class RearrangementPlan:
    permutation: np.ndarray  # 0-based: position n takes old position permutation[n]
    mode: PlanMode = PlanMode.IDENTITY
    seed: int | None = None
    signs: np.ndarray | None = None
    partition: BlockPartition | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        perm = np.asarray(self.permutation, dtype=np.int64).reshape(-1)
        n = perm.shape[0]
        if not np.array_equal(np.sort(perm), np.arange(n)):
            raise ValueError("permutation is not a bijection of [N]")
        perm.setflags(write=False)
        object.__setattr__(self, "permutation", perm)
        object.__setattr__(self, "mode", PlanMode(self.mode))
        if self.signs is not None:
            eps = np.asarray(self.signs, dtype=np.int64).reshape(-1)
            if eps.shape[0] != n or not np.all(np.abs(eps) == 1):
                raise ValueError("signs must be a +-1 vector of length N")
            eps.setflags(write=False)
            object.__setattr__(self, "signs", eps)

    @property
    def n(self) -> int:
        return self.permutation.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RearrangementPlan):
            return NotImplemented
        same_signs = (self.signs is None and other.signs is None) or (
            self.signs is not None and other.signs is not None and np.array_equal(self.signs, other.signs)
        )
        return (
            self.mode is other.mode
            and self.seed == other.seed
            and np.array_equal(self.permutation, other.permutation)
            and same_signs
        )

    def inverse(self) -> "RearrangementPlan":
        inv = np.argsort(self.permutation)
        signs = None if self.signs is None else self.signs[inv]
        return RearrangementPlan(inv, self.mode, self.seed, signs)

    def to_dict(self) -> dict:
        d: dict = {"mode": self.mode.value, "seed": self.seed, "permutation": (self.permutation + 1).tolist()}
        if self.signs is not None:
            d["signs"] = self.signs.tolist()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "RearrangementPlan":
        perm = np.asarray(d["permutation"], dtype=np.int64) - 1
        return cls(perm, PlanMode(d["mode"]), d.get("seed"), d.get("signs"))

    @classmethod
    def from_json(cls, text: str) -> "RearrangementPlan":
        return cls.from_dict(json.loads(text))


def identity_plan(n: int) -> RearrangementPlan:
    return RearrangementPlan(np.arange(n), PlanMode.IDENTITY)


def sample_plan(coeffs: CoeffSeq, mode: PlanMode | str, seed: int = 0, draw: int = 0) -> RearrangementPlan:
    """Deterministic in (coeffs, mode, seed, draw); ``draw`` indexes best-of-R reseeding."""
    mode = PlanMode(mode)
    n = coeffs.n
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(draw,)))
    if mode is PlanMode.IDENTITY:
        return RearrangementPlan(np.arange(n), mode, seed)
    if mode is PlanMode.UNIFORM:
        return RearrangementPlan(rng.permutation(n), mode, seed)
    if mode is PlanMode.SIGNS:
        signs = np.where(rng.random(n) < 0.5, 1, -1)
        return RearrangementPlan(np.arange(n), mode, seed, signs)
    part = dyadic_blocks(coeffs)
    keys = list(part.classes)
    order = tuple(keys[k] for k in rng.permutation(len(keys)))
    within = {}
    for j in keys:
        members = part.classes[j]
        within[j] = tuple(members[k] for k in rng.permutation(len(members)))
    part = BlockPartition(n, part.classes, part.tail, order, within)
    perm = np.asarray(part.sequence(), dtype=np.int64) - 1
    return RearrangementPlan(perm, mode, seed, None, part)


def apply_plan(coeffs: CoeffSeq, plan: RearrangementPlan) -> CoeffSeq:
    if plan.n != coeffs.n:
        raise ValueError(f"plan has size {plan.n}, coefficients {coeffs.n}")
    a = coeffs.coeffs[plan.permutation]
    if plan.signs is not None:
        a = a * plan.signs
    return CoeffSeq(a, coeffs.basis[plan.permutation])


def check_block_plan(plan: RearrangementPlan) -> bool:
    """Every class occupies consecutive positions and the tail comes last in natural order."""
    part = plan.partition
    if part is None:
        return False
    pos = np.empty(plan.n, dtype=np.int64)
    pos[plan.permutation] = np.arange(plan.n)
    for members in part.classes.values():
        p = np.sort(pos[np.asarray(members) - 1])
        if p[-1] - p[0] != len(p) - 1:
            return False
    if part.tail:
        p = pos[np.asarray(part.tail) - 1]
        if not np.array_equal(p, np.arange(plan.n - len(part.tail), plan.n)):
            return False
    return True


# --- Garsia moments ------------------------------------------------------------

EXACT_MAX_M = 8


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    stderr: float
    exact: bool


def _orderings(xs: np.ndarray, trials: int, seed: int, exact: bool) -> np.ndarray:
    m = xs.shape[0]
    if exact:
        idx = np.array(list(itertools.permutations(range(m))), dtype=np.int64).reshape(-1, m)
    else:
        rng = np.random.default_rng(seed)
        idx = rng.permuted(np.tile(np.arange(m), (trials, 1)), axis=1)
    return xs[idx]


def _use_exact(m: int, method: str) -> bool:
    if method not in ("auto", "exact", "mc"):
        raise ValueError(f"unknown method {method!r}")
    if method == "exact" and m > EXACT_MAX_M:
        raise ValueError(f"exact enumeration limited to M <= {EXACT_MAX_M}")
    return method == "exact" or (method == "auto" and m <= EXACT_MAX_M)


def _summarize(y: np.ndarray, exact: bool) -> MomentEstimate:
    if exact or y.shape[0] < 2:
        return MomentEstimate(float(y.mean()), 0.0, exact)
    return MomentEstimate(float(y.mean()), float(y.std(ddof=1) / math.sqrt(y.shape[0])), exact)


def garsia_maxsum_moment(xs: Sequence[float], trials: int = 10_000, seed: int = 0, method: str = "auto") -> MomentEstimate:
    """E max_k (x_{psi(1)} + ... + x_{psi(k)})^2 over uniform permutations psi."""
    x = np.asarray(xs, dtype=float).reshape(-1)
    if x.shape[0] < 1 or trials < 1:
        raise ValueError("need M >= 1 and trials >= 1")
    exact = _use_exact(x.shape[0], method)
    perms = _orderings(x, trials, seed, exact)
    y = np.max(np.cumsum(perms, axis=1) ** 2, axis=1)
    return _summarize(y, exact)


def garsia_bound(xs: Sequence[float]) -> float:
    x = np.asarray(xs, dtype=float)
    return float(x.sum() ** 2 + np.sum(x**2))


def _block_sizes(m: int, size: int) -> list[int]:
    return [min(size, m - s) for s in range(0, m, size)]


def block_moment_rhs(xs: Sequence[float], size: int) -> float:
    """sum_I E[(sum over a uniform |I|-subset)^2] + sum x^2, in closed form."""
    x = np.asarray(xs, dtype=float)
    m = x.shape[0]
    sq = float(np.sum(x**2))
    cross = float(x.sum() ** 2) - sq
    total = sq
    for length in _block_sizes(m, size):
        total += length / m * sq
        if m > 1:
            total += length * (length - 1) / (m * (m - 1)) * cross
    return total


def block_moment_rhs_enumerated(xs: Sequence[float], size: int) -> float:
    """Same quantity by averaging over all subsets; a cross-check for small M."""
    x = np.asarray(xs, dtype=float)
    m = x.shape[0]
    total = float(np.sum(x**2))
    for length in _block_sizes(m, size):
        sums = [sum(x[list(c)]) ** 2 for c in itertools.combinations(range(m), length)]
        total += float(np.mean(sums))
    return total


@dataclass(frozen=True)
class BlockMomentCheck:
    lhs: MomentEstimate
    rhs: float

    @property
    def ratio(self) -> float:
        return self.lhs.mean / self.rhs if self.rhs > 0 else 0.0


def block_moment_bound_check(
    xs: Sequence[float], size: int, trials: int = 10_000, seed: int = 0, method: str = "auto"
) -> BlockMomentCheck:
    """E sum_I max_{I' in I} (sum_{j in I'} x_{psi(j)})^2 for consecutive blocks I of length ``size``."""
    x = np.asarray(xs, dtype=float).reshape(-1)
    m = x.shape[0]
    if not 1 <= size <= m:
        raise ValueError(f"block size must lie in [1, {m}], got {size}")
    exact = _use_exact(m, method)
    perms = _orderings(x, trials, seed, exact)
    y = np.zeros(perms.shape[0])
    for start in range(0, m, size):
        block = perms[:, start : start + size]
        pre = np.concatenate([np.zeros((perms.shape[0], 1)), np.cumsum(block, axis=1)], axis=1)
        y += (pre.max(axis=1) - pre.min(axis=1)) ** 2
    return BlockMomentCheck(_summarize(y, exact), block_moment_rhs(x, size))


# --- disjoint-support counterexample -------------------------------------------


def psi_index(k: int) -> int:
    """Haar index of H_{k,2}, supported on (2^-k, 2^{1-k}); k >= 1."""
    return (1 << k) + 1


@dataclass(frozen=True)
class CounterexampleOrder:
    order: tuple[int, ...]  # Haar index at each position
    is_psi: tuple[bool, ...]

    def rho_count(self) -> np.ndarray:
        return np.cumsum(~np.asarray(self.is_psi))


def _rate_values(w: Callable[[int], int] | Sequence[int], n: int) -> list[int]:
    if callable(w):
        vals = [int(w(m)) for m in range(1, n + 1)]
    else:
        if len(w) < n:
            raise ValueError(f"rate lookup has {len(w)} entries, need {n}")
        vals = [int(v) for v in list(w)[:n]]
    if any(b < a for a, b in zip(vals, vals[1:])):
        raise ValueError("rate function must be nondecreasing")
    return vals


def counterexample_order(n: int, w: Callable[[int], int] | Sequence[int]) -> CounterexampleOrder:
    """Interleave Psi = (H_{k,2})_{k>=1} with the other Haar functions rho.

    Position m (1-based) takes the next rho function whenever that keeps the
    number of rho functions among the first m at most w(m); otherwise it takes
    the next Psi function.  Both subsequences keep their own order.
    """
    if n < 1:
        raise ValueError("N must be >= 1")
    rate = _rate_values(w, n)
    order: list[int] = []
    flags: list[bool] = []
    k = 1
    rho_next = 0
    used_rho = 0
    for m in range(1, n + 1):
        if used_rho + 1 <= rate[m - 1]:
            while is_psi(rho_next):
                rho_next += 1
            order.append(rho_next)
            flags.append(False)
            rho_next += 1
            used_rho += 1
        else:
            order.append(psi_index(k))
            flags.append(True)
            k += 1
    return CounterexampleOrder(tuple(order), tuple(flags))


def haar_counterexample_system(n: int, w: Callable[[int], int] | Sequence[int]) -> SystemSpec:
    return SystemSpec(SystemKind.HAAR, n, haar_order=counterexample_order(n, w).order)


def supports_disjoint(indices: Sequence[int]) -> bool:
    """Exact pairwise disjointness of Haar supports (rational arithmetic)."""
    spans = []
    for h in indices:
        h = int(h)
        if h == 0:
            spans.append((Fraction(0), Fraction(1)))
        else:
            k, j = haar_kj(h)
            spans.append((Fraction(j - 1, 1 << k), Fraction(j, 1 << k)))
    spans.sort()
    return all(a[1] <= b[0] for a, b in zip(spans, spans[1:]))


def is_psi(index: int) -> bool:
    if index < 3:
        return False
    k, j = haar_kj(index)
    return j == 2
