"""Seeded Monte Carlo experiments: configuration, execution and summaries.

Seeds.  Every (N, ordering, replicate) task gets the derived seed

    SeedSequence(master, spawn_key=(N, ordering_id, replicate)).generate_state(1, uint64)[0]

with ordering ids IDENTITY=0, UNIFORM=1, BLOCK=2, SIGNS=3; this seed drives
the rearrangement draws.  Quadrature nodes are shared by all orderings of a
replicate (paired design): x-based plans are keyed by (N, replicate), and
coin-flip or Gaussian draws by (replicate,) alone, so a draw at size N is the
prefix of the same draw at any larger size.
"""

from __future__ import annotations

import enum
import json
import math
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .onsys import (
    CoeffSeq,
    NormEstimate,
    SampleMode,
    SamplePlan,
    Samples,
    SystemKind,
    SystemSpec,
    Variant,
    dirichlet_coeffs,
    l2_vp_norm,
    pointwise_functional,
    read_coeff_csv,
    sample_basis,
)
from .rearrange import PlanMode, apply_plan, garsia_bound, garsia_maxsum_moment, sample_plan
from .varcore import Method, prefix_path, variation_bruteforce, variation_exact

DP_BUDGET = 1e10
ORACLE_TOL = 1e-12
ORACLE_P = (1.0, 1.5, 2.0, 3.0)
ORDERING_IDS = {PlanMode.IDENTITY: 0, PlanMode.UNIFORM: 1, PlanMode.BLOCK: 2, PlanMode.SIGNS: 3}
TREND_NOTE = (
    "Trend statistics only: desk-scale N cannot separate sqrt(ln ln N) growth from a constant, "
    "so no asymptotic fits are reported."
)


class ExperimentKind(str, enum.Enum):
    ORACLE_SUITE = "ORACLE_SUITE"
    GROWTH = "GROWTH"
    COMPARE_ORDERINGS = "COMPARE_ORDERINGS"
    GAUSSIAN_LOWER = "GAUSSIAN_LOWER"
    GARSIA_MOMENT = "GARSIA_MOMENT"
    MAXIMAL_RATIO = "MAXIMAL_RATIO"


class ValueKind(str, enum.Enum):
    L2V2 = "L2V2"
    L2VP = "L2VP"
    SUP_RATIO = "SUP_RATIO"
    EV2 = "EV2"
    MOMENT = "MOMENT"
    MAXIMAL_RATIO = "MAXIMAL_RATIO"
    ORACLE_GAP = "ORACLE_GAP"


class ProfileKind(str, enum.Enum):
    FLAT = "FLAT"
    DIRICHLET = "DIRICHLET"
    FILE = "FILE"
    GAUSSIAN_RANDOM = "GAUSSIAN_RANDOM"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CoeffProfile:
    kind: ProfileKind = ProfileKind.DIRICHLET
    normalize: bool = True
    path: str | None = None

    def build(self, n: int, seed: int, replicate: int) -> CoeffSeq:
        if self.kind in (ProfileKind.FLAT, ProfileKind.DIRICHLET):
            return dirichlet_coeffs(n, self.normalize)
        if self.kind is ProfileKind.FILE:
            full = read_coeff_csv(self.path)  # type: ignore[arg-type]
            if full.n < n:
                raise ValueError(f"{self.path} has {full.n} coefficients, N = {n} requested")
            c = CoeffSeq(full.coeffs[:n])
        else:
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0xC0EF, n, replicate)))
            c = CoeffSeq(rng.normal(size=n) + 1j * rng.normal(size=n))
        if self.normalize and c.total_mass > 0:
            c = c.scaled(1 / math.sqrt(c.total_mass))
        return c


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: ExperimentKind
    system: SystemKind = SystemKind.TRIG
    C: float | None = None
    coeff_profile: CoeffProfile = field(default_factory=CoeffProfile)
    p: float = 2.0
    Ns: tuple[int, ...] = ()
    replicates: int = 1
    seed: int = 0
    plan: SamplePlan = field(default_factory=SamplePlan)
    orderings: tuple[PlanMode, ...] = (PlanMode.IDENTITY,)
    best_of: int = 8
    variant: Variant = Variant.FULL
    method: Method | None = None
    instances: int = 500
    n_max: int = 12
    trials: int = 4000

    def system_spec(self, n: int) -> SystemSpec:
        return SystemSpec(self.system, n, self.C)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["plan"] = {k: (v.value if isinstance(v, enum.Enum) else v) for k, v in asdict(self.plan).items()}
        d["coeff_profile"] = {k: (v.value if isinstance(v, enum.Enum) else v) for k, v in asdict(self.coeff_profile).items()}
        for k, v in list(d.items()):
            if isinstance(v, enum.Enum):
                d[k] = v.value
        d["orderings"] = [o.value for o in self.orderings]
        d["Ns"] = list(self.Ns)
        return d


# --- config parsing ------------------------------------------------------------


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _fail(source: str, text: str, key: str | None, msg: str) -> ConfigError:
    line = _line_of(text, key) if key else None
    where = f"{source}:{line}" if line else source
    return ConfigError(f"{where}: {msg}")


_FIELDS = {
    "experiment", "system", "coeff_profile", "p", "Ns", "replicates", "seed", "plan",
    "orderings", "best_of", "variant", "method", "instances", "n_max", "trials",
}


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse and validate a JSON experiment config; errors name the offending line."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}:1: config must be a JSON object")

    def fail(key: str | None, msg: str) -> ConfigError:
        return _fail(source, text, key, msg)

    unknown = sorted(set(raw) - _FIELDS)
    if unknown:
        raise fail(unknown[0], f"unknown field {unknown[0]!r}")

    def enum_of(cls, value, key):
        try:
            return cls(value)
        except ValueError:
            allowed = ", ".join(m.value for m in cls)
            raise fail(key, f"{key} must be one of {allowed}, got {value!r}") from None

    def integer(key, value, lo=None):
        if isinstance(value, bool) or not isinstance(value, int):
            raise fail(key, f"{key} must be an integer, got {value!r}")
        if lo is not None and value < lo:
            raise fail(key, f"{key} must be >= {lo}, got {value}")
        return value

    if "experiment" not in raw:
        raise ConfigError(f"{source}:1: missing required field 'experiment'")
    kw: dict[str, Any] = {"experiment": enum_of(ExperimentKind, raw["experiment"], "experiment")}

    sysv = raw.get("system", {"kind": "TRIG"})
    if isinstance(sysv, str):
        sysv = {"kind": sysv}
    if not isinstance(sysv, dict) or "kind" not in sysv:
        raise fail("system", "system must be an object with a 'kind'")
    kw["system"] = enum_of(SystemKind, sysv["kind"], "kind")
    if "C" in sysv:
        c = sysv["C"]
        if not isinstance(c, (int, float)) or isinstance(c, bool) or not c >= 1:
            raise fail("C", f"C must be a number >= 1, got {c!r}")
        if kw["system"] is not SystemKind.INDEP_BOUNDED:
            raise fail("C", "C only applies to INDEP_BOUNDED")
        kw["C"] = float(c)

    prof = raw.get("coeff_profile", {"kind": "DIRICHLET"})
    if isinstance(prof, str):
        prof = {"kind": prof}
    if not isinstance(prof, dict) or "kind" not in prof:
        raise fail("coeff_profile", "coeff_profile must be an object with a 'kind'")
    pkind = enum_of(ProfileKind, prof["kind"], "kind")
    normalize = prof.get("normalize", True)
    if not isinstance(normalize, bool):
        raise fail("normalize", "normalize must be true or false")
    path = prof.get("path")
    if pkind is ProfileKind.FILE:
        if not isinstance(path, str):
            raise fail("coeff_profile", "FILE profile needs a 'path'")
        if not os.path.isabs(path) and source not in ("<config>",):
            path = os.path.join(os.path.dirname(os.path.abspath(source)), path)
    kw["coeff_profile"] = CoeffProfile(pkind, normalize, path)

    if "p" in raw:
        p = raw["p"]
        if not isinstance(p, (int, float)) or isinstance(p, bool) or not (math.isfinite(p) and p >= 1):
            raise fail("p", f"p must be a finite number >= 1, got {p!r}")
        kw["p"] = float(p)

    if "Ns" in raw:
        ns = raw["Ns"]
        if not isinstance(ns, list) or not ns:
            raise fail("Ns", "Ns must be a nonempty list of sizes")
        ns = [integer("Ns", v, 1) for v in ns]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise fail("Ns", f"Ns must be strictly increasing, got {ns}")
        kw["Ns"] = tuple(ns)
    elif kw["experiment"] is not ExperimentKind.ORACLE_SUITE:
        raise fail("experiment", "missing required field 'Ns'")

    for key in ("replicates", "best_of", "instances", "n_max", "trials"):
        if key in raw:
            kw[key] = integer(key, raw[key], 1)
    if "seed" in raw:
        seed = integer("seed", raw["seed"], 0)
        if seed >= 2**64:
            raise fail("seed", "seed must fit in 64 bits")
        kw["seed"] = seed
    if kw.get("n_max", 12) > 20:
        raise fail("n_max", "n_max is limited to 20 by the brute-force oracle")

    planv = raw.get("plan", {})
    if not isinstance(planv, dict):
        raise fail("plan", "plan must be an object")
    unknown = sorted(set(planv) - {"mode", "count", "seed", "strata"})
    if unknown:
        raise fail(unknown[0], f"unknown plan field {unknown[0]!r}")
    mode = enum_of(SampleMode, planv.get("mode", "RANDOM_POINTS"), "mode")
    count = integer("count", planv.get("count", 64), 1)
    pseed = integer("seed", planv.get("seed", kw.get("seed", 0)), 0)
    strata = planv.get("strata", "uniform")
    try:
        plan = SamplePlan(mode, count, pseed, strata)
    except ValueError as exc:
        raise fail("plan", str(exc)) from None
    kw["plan"] = plan
    try:
        SystemSpec(kw["system"], 1, kw.get("C")).check_plan(plan)
    except ValueError as exc:
        raise fail("plan", str(exc)) from None

    if "orderings" in raw:
        ords = raw["orderings"]
        if not isinstance(ords, list) or not ords:
            raise fail("orderings", "orderings must be a nonempty list")
        modes = tuple(enum_of(PlanMode, o, "orderings") for o in ords)
        if len(set(modes)) != len(modes):
            raise fail("orderings", "orderings must not repeat")
        kw["orderings"] = modes
    if kw["experiment"] is ExperimentKind.COMPARE_ORDERINGS and PlanMode.IDENTITY not in kw.get("orderings", ()):
        raise fail("orderings", "COMPARE_ORDERINGS needs IDENTITY as the reference ordering")
    if "variant" in raw:
        kw["variant"] = enum_of(Variant, raw["variant"], "variant")
    if "method" in raw and raw["method"] is not None:
        kw["method"] = enum_of(Method, raw["method"], "method")
        if kw["method"] not in (Method.EXACT_DP, Method.EXTREMA_PRUNED):
            raise fail("method", "method must be EXACT_DP or EXTREMA_PRUNED")
    if kw.get("method") is Method.EXTREMA_PRUNED and kw["system"] is SystemKind.TRIG:
        raise fail("method", "EXTREMA_PRUNED needs a real-valued system")
    return ExperimentConfig(**kw)


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    return parse_config(text, str(path))


# --- records -------------------------------------------------------------------


CSV_COLUMNS = ("experiment", "system", "ordering", "N", "replicate", "kind", "value", "stderr", "seconds", "seed")


@dataclass(frozen=True)
class RunRecord:
    experiment: str
    system: str
    ordering: str
    N: int
    replicate: int
    kind: str
    value: float
    stderr: float
    seconds: float
    seed: int

    def row(self) -> list[str]:
        return [
            self.experiment, self.system, self.ordering, str(self.N), str(self.replicate), self.kind,
            repr(float(self.value)), repr(float(self.stderr)), f"{self.seconds:.6f}", str(self.seed),
        ]


def derived_seed(master: int, n: int, ordering: PlanMode, replicate: int) -> int:
    ss = np.random.SeedSequence(master, spawn_key=(n, ORDERING_IDS[ordering], replicate))
    return int(ss.generate_state(1, np.uint64)[0])


def dp_cost(config: ExperimentConfig) -> float:
    """Worst-case elementary DP steps: sum over tasks of (samples * N^2 / 2)."""
    if config.experiment not in (ExperimentKind.GROWTH, ExperimentKind.COMPARE_ORDERINGS, ExperimentKind.MAXIMAL_RATIO):
        return 0.0
    plans = sum(1 if o is PlanMode.IDENTITY else config.best_of for o in config.orderings)
    samples = config.plan.count
    return float(sum(n * n / 2 * samples * config.replicates * plans for n in config.Ns))


def check_budget(config: ExperimentConfig, force: bool = False) -> None:
    cost = dp_cost(config)
    if cost > DP_BUDGET and not force:
        raise ConfigError(
            f"estimated exact-DP cost {cost:.3g} steps exceeds the budget of {DP_BUDGET:.0e}; "
            "use method EXTREMA_PRUNED for real systems, reduce plan.count or replicates, or pass --force"
        )


# --- tasks ---------------------------------------------------------------------


def _sample_key(config: ExperimentConfig, n: int, replicate: int) -> tuple[int, ...]:
    if config.plan.mode is SampleMode.COIN_FLIPS or config.system is SystemKind.GAUSSIAN_COEFF:
        return (replicate,)
    return (n, replicate)


def _permuted(samples: Samples, perm: np.ndarray) -> Samples:
    return Samples(samples.values[:, perm], samples.weights, samples.strata_pairs, samples.random)


def _kind_for(config: ExperimentConfig) -> ValueKind:
    if config.variant is Variant.SUP:
        return ValueKind.SUP_RATIO
    return ValueKind.L2V2 if config.p == 2 else ValueKind.L2VP


def _norm_task(config: ExperimentConfig, n: int, replicate: int) -> list[RunRecord]:
    """All orderings of one (N, replicate), evaluated on shared nodes."""
    system = config.system_spec(n)
    base = config.coeff_profile.build(n, config.seed, replicate)
    samples = sample_basis(system, base, config.plan, *_sample_key(config, n, replicate))
    out = []
    for ordering in config.orderings:
        start = time.perf_counter()
        seed = derived_seed(config.seed, n, ordering, replicate)
        draws = 1 if ordering is PlanMode.IDENTITY else config.best_of
        best: NormEstimate | None = None
        for draw in range(draws):
            plan = sample_plan(base, ordering, seed, draw)
            coeffs = apply_plan(base, plan)
            est = l2_vp_norm(
                system, coeffs, config.p, config.plan, config.variant, config.method,
                samples=_permuted(samples, plan.permutation),
            )
            if best is None or est.value < best.value:
                best = est
        assert best is not None
        kind = _kind_for(config)
        value, stderr = best.value, best.stderr
        if kind is ValueKind.SUP_RATIO:
            norm = math.sqrt(base.total_mass)
            value, stderr = value / norm, stderr / norm
        out.append(
            RunRecord(
                config.experiment.value, config.system.value, ordering.value, n, replicate, kind.value,
                value, stderr, time.perf_counter() - start, seed,
            )
        )
    return out


def _maximal_task(config: ExperimentConfig, n: int, replicate: int) -> list[RunRecord]:
    """L^2(V^2) over L^2 of the maximal function max_m |S_m|, on shared nodes."""
    start = time.perf_counter()
    system = config.system_spec(n)
    coeffs = config.coeff_profile.build(n, config.seed, replicate)
    samples = sample_basis(system, coeffs, config.plan, *_sample_key(config, n, replicate))
    full = l2_vp_norm(system, coeffs, 2.0, config.plan, Variant.FULL, config.method, samples=samples)
    sums = np.cumsum(samples.values * coeffs.coeffs, axis=1)
    maximal = np.max(np.abs(sums), axis=1)
    m2 = math.sqrt(float(np.dot(samples.weights, maximal**2)))
    ratio = full.value / m2 if m2 > 0 else 0.0
    seed = derived_seed(config.seed, n, PlanMode.IDENTITY, replicate)
    return [
        RunRecord(
            config.experiment.value, config.system.value, PlanMode.IDENTITY.value, n, replicate,
            ValueKind.MAXIMAL_RATIO.value, ratio, full.stderr / m2 if m2 > 0 else 0.0,
            time.perf_counter() - start, seed,
        )
    ]


def _gaussian_task(config: ExperimentConfig, n: int, replicate: int) -> list[RunRecord]:
    """E ||{c_n X_n}||_{V^2} over the plan's draws (first moment, not L^2)."""
    start = time.perf_counter()
    system = SystemSpec(SystemKind.GAUSSIAN_COEFF, n)
    coeffs = config.coeff_profile.build(n, config.seed, replicate)
    samples = sample_basis(system, coeffs, config.plan, replicate)
    inc = (samples.values * coeffs.coeffs).real
    v = np.array([pointwise_functional(row, Variant.FULL, config.p, config.method) for row in inc])
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    seed = derived_seed(config.seed, n, PlanMode.IDENTITY, replicate)
    return [
        RunRecord(
            config.experiment.value, SystemKind.GAUSSIAN_COEFF.value, PlanMode.IDENTITY.value, n, replicate,
            ValueKind.EV2.value, float(v.mean()), se, time.perf_counter() - start, seed,
        )
    ]


def _garsia_task(config: ExperimentConfig, m: int, replicate: int) -> list[RunRecord]:
    """Ratio of the Garsia moment to (sum x)^2 + sum x^2 for one random vector of length M."""
    start = time.perf_counter()
    seed = derived_seed(config.seed, m, PlanMode.UNIFORM, replicate)
    rng = np.random.default_rng(seed)
    xs = rng.normal(size=m) * np.exp(rng.normal(size=m)) + rng.normal() * rng.random()
    est = garsia_maxsum_moment(xs, config.trials, seed)
    bound = garsia_bound(xs)
    return [
        RunRecord(
            config.experiment.value, "GARSIA", PlanMode.UNIFORM.value, m, replicate, ValueKind.MOMENT.value,
            est.mean / bound, est.stderr / bound, time.perf_counter() - start, seed,
        )
    ]


def oracle_instances(seed: int, instances: int, n_max: int) -> Iterable[tuple[int, float, np.ndarray]]:
    rng = np.random.default_rng(seed)
    for k in range(instances):
        n = int(rng.integers(1, n_max + 1))
        p = ORACLE_P[k % len(ORACLE_P)]
        a = rng.normal(size=n) + 1j * rng.normal(size=n)
        yield n, p, a


def _oracle_records(config: ExperimentConfig) -> list[RunRecord]:
    out = []
    for k, (n, p, a) in enumerate(oracle_instances(config.seed, config.instances, config.n_max)):
        start = time.perf_counter()
        path = prefix_path(a)
        ex = variation_exact(path, p).value
        bf = variation_bruteforce(path, p).value
        gap = abs(ex - bf) / max(1.0, abs(bf))
        out.append(
            RunRecord(
                config.experiment.value, "PATH", PlanMode.IDENTITY.value, n, k, ValueKind.ORACLE_GAP.value,
                gap, 0.0, time.perf_counter() - start, config.seed,
            )
        )
    return out


_TASKS = {
    ExperimentKind.GROWTH: _norm_task,
    ExperimentKind.COMPARE_ORDERINGS: _norm_task,
    ExperimentKind.MAXIMAL_RATIO: _maximal_task,
    ExperimentKind.GAUSSIAN_LOWER: _gaussian_task,
    ExperimentKind.GARSIA_MOMENT: _garsia_task,
}


def _run_task(args: tuple[ExperimentConfig, int, int]) -> list[RunRecord]:
    config, n, replicate = args
    return _TASKS[config.experiment](config, n, replicate)


def worker_count(default: int = 1) -> int:
    raw = os.environ.get("VARNORM_WORKERS")
    if not raw:
        return default
    try:
        w = int(raw)
    except ValueError:
        raise ConfigError(f"VARNORM_WORKERS must be a positive integer, got {raw!r}") from None
    if w < 1:
        raise ConfigError(f"VARNORM_WORKERS must be a positive integer, got {raw!r}")
    return w


@dataclass
class RunResult:
    config: ExperimentConfig
    records: list[RunRecord]
    summary: dict


def run(config: ExperimentConfig, force: bool = False, workers: int | None = None) -> RunResult:
    check_budget(config, force)
    if config.experiment is ExperimentKind.ORACLE_SUITE:
        records = _oracle_records(config)
    else:
        tasks = [(config, n, r) for n in config.Ns for r in range(config.replicates)]
        workers = worker_count() if workers is None else workers
        if workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                chunks = list(pool.map(_run_task, tasks))
        else:
            chunks = [_run_task(t) for t in tasks]
        records = [r for chunk in chunks for r in chunk]
    order = {o.value: i for i, o in enumerate(config.orderings)}
    records.sort(key=lambda r: (r.N, order.get(r.ordering, len(order)), r.replicate))
    return RunResult(config, records, summarize(config, records))


# --- summaries -----------------------------------------------------------------


def _kendall_tau(y: Sequence[float]) -> float:
    n = len(y)
    if n < 2:
        return 0.0
    s = 0
    for i in range(n):
        for j in range(i + 1, n):
            s += (y[j] > y[i]) - (y[j] < y[i])
    return s / (n * (n - 1) / 2)


def _group_stats(n: int, values: np.ndarray, stderrs: np.ndarray) -> dict:
    k = values.size
    mean = float(values.mean())
    if k > 1:
        se = float(values.std(ddof=1) / math.sqrt(k))
    else:
        se = float(stderrs[0])
    rms = float(math.sqrt(np.mean(values**2)))
    d: dict[str, Any] = {
        "count": k,
        "mean": mean,
        "stderr": se,
        "rms": rms,
        "median": float(np.median(values)),
        "min": float(values.min()),
        "max": float(values.max()),
    }
    if n > 1:
        d["mean_sq_over_lnN"] = mean**2 / math.log(n)
        d["rms_sq_over_lnN"] = rms**2 / math.log(n)
    if n > math.e:
        lnln = math.log(math.log(n))
        d["mean_sq_over_lnlnN"] = mean**2 / lnln
        d["rms_sq_over_lnlnN"] = rms**2 / lnln
        d["mean_over_sqrt_N_lnlnN"] = mean / math.sqrt(n * lnln)
    return d


def summarize(config: ExperimentConfig, records: Sequence[RunRecord]) -> dict:
    summary: dict[str, Any] = {"experiment": config.experiment.value, "note": TREND_NOTE, "config": config.to_dict()}
    if config.experiment is ExperimentKind.ORACLE_SUITE:
        gaps = [r.value for r in records]
        summary["oracle"] = {
            "instances": len(gaps),
            "mismatches": sum(g > ORACLE_TOL for g in gaps),
            "max_gap": max(gaps) if gaps else 0.0,
            "tolerance": ORACLE_TOL,
        }
        return summary

    groups: dict[tuple[str, int, str], list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.ordering, r.N, r.kind), []).append(r)
    rows = []
    for (ordering, n, kind), recs in groups.items():
        vals = np.array([r.value for r in recs])
        ses = np.array([r.stderr for r in recs])
        rows.append({"ordering": ordering, "N": n, "kind": kind, **_group_stats(n, vals, ses)})
    rows.sort(key=lambda d: (d["ordering"], d["N"]))
    summary["groups"] = rows

    trends = {}
    for ordering in sorted({d["ordering"] for d in rows}):
        series = [d for d in rows if d["ordering"] == ordering]
        for stat in ("mean", "rms"):
            y = [d[stat] for d in series]
            trends[f"{ordering}:{stat}"] = {
                "nondecreasing": all(b >= a for a, b in zip(y, y[1:])),
                "strictly_increasing": all(b > a for a, b in zip(y, y[1:])),
                "kendall_tau": _kendall_tau(y),
            }
    summary["trends"] = trends

    if config.experiment is ExperimentKind.COMPARE_ORDERINGS:
        ref = {(r.N, r.replicate): r.value for r in records if r.ordering == PlanMode.IDENTITY.value}
        paired = []
        for ordering in config.orderings:
            if ordering is PlanMode.IDENTITY:
                continue
            for n in config.Ns:
                ratios = [
                    r.value / ref[(n, r.replicate)]
                    for r in records
                    if r.ordering == ordering.value and r.N == n and ref.get((n, r.replicate), 0) > 0
                ]
                if ratios:
                    paired.append(
                        {
                            "ordering": ordering.value,
                            "N": n,
                            "median_ratio": float(np.median(ratios)),
                            "mean_ratio": float(np.mean(ratios)),
                            "replicates": len(ratios),
                        }
                    )
            medians = [d["median_ratio"] for d in paired if d["ordering"] == ordering.value]
            trends[f"{ordering.value}:median_ratio"] = {
                "nonincreasing": all(b <= a for a, b in zip(medians, medians[1:])),
                "strictly_decreasing": all(b < a for a, b in zip(medians, medians[1:])),
                "kendall_tau": _kendall_tau(medians),
            }
        summary["paired_ratios"] = paired
    if config.experiment is ExperimentKind.GARSIA_MOMENT:
        summary["max_ratio"] = max(r.value for r in records)
    return summary
