"""Timing harness comparing the probability engines across answer signatures.

Answers are grouped into (d, n) buckets. For each answer every engine is run
once as warm-up and then ``repetitions`` times; the per-answer time is the
median of those runs. Buckets report mean, standard deviation and median of
the per-answer times. Percentile gains of the semiring engine against another
method use ``gain = (t_method - t_semiring) / t_method``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import random
import statistics
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .adaptive import Engine, choose_engine
from .config import EngineConfig
from .errors import OracleCapExceeded
from .kc import compile, wmc
from .lineage import to_lineage
from .oracle import prob_possible_worlds
from .query import AnswerSignature, answer_signature, match_query
from .semiring import build_symbolic, evaluate
from .synth import feasible, random_dnf, random_graph, random_probs, random_query

log = logging.getLogger(__name__)

ENGINES = ("semiring", "oracle", "kc", "adaptive")
TIMEOUT = "time-out"
PERCENTILES = (10, 25, 50, 75, 90)


@dataclass(frozen=True)
class Bucket:
    d_lo: int
    d_hi: int
    n_lo: int = 1
    n_hi: Optional[int] = None  # exclusive; None = unbounded

    def contains(self, d, n) -> bool:
        return (self.d_lo <= d < self.d_hi and n >= self.n_lo
                and (self.n_hi is None or n < self.n_hi))

    @property
    def label(self):
        dpart = f"d[{self.d_lo},{self.d_hi})"
        if self.n_lo <= 1 and self.n_hi is None:
            return dpart
        if self.n_hi is None:
            return f"{dpart} n>={self.n_lo}"
        if self.n_lo <= 1:
            return f"{dpart} n<{self.n_hi}"
        return f"{dpart} n[{self.n_lo},{self.n_hi})"


DEFAULT_BUCKETS = (
    Bucket(2, 5, 1, 6), Bucket(2, 5, 6),
    Bucket(5, 9, 1, 13), Bucket(5, 9, 13),
    Bucket(9, 13, 1, 18), Bucket(9, 13, 18),
    Bucket(13, 16),
)


@dataclass
class BenchConfig:
    generator: str = "dnf"  # "dnf" or "graph"
    buckets: tuple = DEFAULT_BUCKETS
    per_bucket: int = 20
    repetitions: int = 5
    engines: tuple = ENGINES
    timeout_s: float = 5.0
    oracle_var_cap: int = 16
    n_cap: int = 30  # upper limit for unbounded n ranges
    s_range: tuple = (3, 7)
    seed: int = 0
    # graph generator
    graph_vertices: int = 8
    graph_labels: int = 3
    graph_edges: int = 60
    graph_queries: int = 40
    engine: EngineConfig = field(default_factory=EngineConfig)

    @classmethod
    def from_mapping(cls, data: dict) -> "BenchConfig":
        data = dict(data)
        if "buckets" in data:
            data["buckets"] = tuple(Bucket(**b) if isinstance(b, dict) else Bucket(*b)
                                    for b in data["buckets"])
        for key in ("engines", "s_range"):
            if key in data:
                data[key] = tuple(data[key])
        engine_keys = {k: data.pop(k) for k in list(data) if "." in k}
        if "engine" in data:
            engine_keys.update(data.pop("engine"))
        return cls(engine=EngineConfig.from_mapping(engine_keys), **data)

    @classmethod
    def load(cls, path) -> "BenchConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_mapping(json.load(fh))


@dataclass
class BenchCase:
    id: int
    derivations: list
    s: int
    probs: dict
    bucket: int = -1

    @property
    def signature(self) -> AnswerSignature:
        return AnswerSignature(len(self.derivations), len(frozenset().union(*self.derivations)), self.s)


def bucket_of(buckets, d, n) -> int:
    hits = [i for i, b in enumerate(buckets) if b.contains(d, n)]
    if len(hits) > 1:
        raise ValueError(f"signature d={d}, n={n} falls in overlapping buckets {hits}")
    return hits[0] if hits else -1


def _n_range(b: Bucket, cap):
    hi = (b.n_hi - 1) if b.n_hi is not None else max(cap, b.n_lo)
    return b.n_lo, hi


def generate_dnf_cases(cfg: BenchConfig, rng: random.Random) -> list[BenchCase]:
    cases = []
    for bi, b in enumerate(cfg.buckets):
        n_lo, n_hi = _n_range(b, cfg.n_cap)
        made = 0
        while made < cfg.per_bucket:
            d = rng.randrange(b.d_lo, b.d_hi)
            s = rng.randint(*cfg.s_range)
            n = rng.randint(n_lo, n_hi)
            if not feasible(d, n, s):
                continue
            derivs = random_dnf(rng, d, n, s)
            probs = random_probs(rng, range(1, n + 1))
            cases.append(BenchCase(len(cases), derivs, s, probs, bi))
            made += 1
    return cases


def generate_graph_cases(cfg: BenchConfig, rng: random.Random) -> list[BenchCase]:
    """Answers of random queries over one random graph; answers outside every bucket are dropped."""
    g = random_graph(rng, cfg.graph_vertices, cfg.graph_labels, cfg.graph_edges)
    probs = g.probs
    counts = [0] * len(cfg.buckets)
    cases = []
    for _ in range(cfg.graph_queries):
        q = random_query(rng, g, rng.randint(*cfg.s_range))
        for a in match_query(g, q):
            sig = answer_signature(a, q)
            bi = bucket_of(cfg.buckets, sig.d, sig.n)
            if bi < 0 or counts[bi] >= cfg.per_bucket:
                continue
            counts[bi] += 1
            used = {e: probs[e] for e in a.edges()}
            cases.append(BenchCase(len(cases), list(a.derivations), q.size, used, bi))
    return cases


def engine_runners(cfg: BenchConfig) -> dict[str, Callable]:
    ecfg = cfg.engine

    def semiring(case):
        return evaluate(build_symbolic(case.derivations), case.probs)

    def oracle(case):
        return prob_possible_worlds(to_lineage(case.derivations), case.probs, cfg.oracle_var_cap)

    def kc(case):
        return wmc(compile(to_lineage(case.derivations), ecfg.node_budget), case.probs)

    def adaptive(case):
        if choose_engine(case.signature, ecfg) is Engine.SEMIRING:
            return semiring(case)
        return kc(case)

    return {"semiring": semiring, "oracle": oracle, "kc": kc, "adaptive": adaptive}


def time_call(fn, arg, repetitions, timeout_s):
    """(median seconds, mean seconds, result); None timings on time-out."""
    t0 = time.perf_counter()
    result = fn(arg)  # warm-up, excluded
    if time.perf_counter() - t0 > timeout_s:
        return None, None, result
    samples = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        fn(arg)
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples), statistics.fmean(samples), result


@dataclass
class CaseTiming:
    case: BenchCase
    times: dict  # engine -> median seconds or None (time-out)
    probs: dict  # engine -> probability or None


@dataclass
class BenchResult:
    config: BenchConfig
    timings: list

    def bucket_rows(self) -> list[dict]:
        rows = []
        for bi, b in enumerate(self.config.buckets):
            members = [t for t in self.timings if t.case.bucket == bi]
            for eng in self.config.engines:
                times = [t.times[eng] for t in members if t.times.get(eng) is not None]
                timeouts = sum(1 for t in members if t.times.get(eng) is None)
                row = {"bucket": b.label, "d_lo": b.d_lo, "d_hi": b.d_hi, "n_lo": b.n_lo,
                       "n_hi": "" if b.n_hi is None else b.n_hi, "engine": eng,
                       "count": len(members), "timeouts": timeouts}
                if timeouts or not times:
                    row.update(mean_us=TIMEOUT if timeouts else "", std_us="", median_us="")
                else:
                    us = [x * 1e6 for x in times]
                    row.update(mean_us=f"{statistics.fmean(us):.2f}",
                               std_us=f"{statistics.pstdev(us):.2f}",
                               median_us=f"{statistics.median(us):.2f}")
                rows.append(row)
        return rows

    def bucket_medians(self, engine) -> dict[int, float]:
        out = {}
        for bi in range(len(self.config.buckets)):
            times = [t.times[engine] for t in self.timings
                     if t.case.bucket == bi and t.times.get(engine) is not None]
            if times:
                out[bi] = statistics.median(times)
        return out

    def gains(self, method: str, ours: str = "semiring") -> dict[int, list[float]]:
        out: dict[int, list[float]] = {}
        for t in self.timings:
            tm, to = t.times.get(method), t.times.get(ours)
            if tm is None or to is None or tm <= 0:
                continue
            out.setdefault(t.case.bucket, []).append(percentile_gain_ratio(tm, to))
        return out

    def gain_rows(self, methods=("oracle", "kc")) -> list[dict]:
        rows = []
        for method in methods:
            if method not in self.config.engines:
                continue
            for bi, gains in sorted(self.gains(method).items()):
                for p in PERCENTILES:
                    rows.append({"bucket": self.config.buckets[bi].label, "method": method,
                                 "percentile": p, "gain": f"{percentile_gain(gains, p):.4f}",
                                 "count": len(gains)})
        return rows

    def totals(self) -> dict[str, Optional[float]]:
        out = {}
        for eng in self.config.engines:
            times = [t.times.get(eng) for t in self.timings]
            out[eng] = None if any(x is None for x in times) else sum(times)
        return out

    def max_prob_disagreement(self) -> float:
        worst = 0.0
        for t in self.timings:
            vals = [v for v in t.probs.values() if v is not None]
            if vals:
                worst = max(worst, max(vals) - min(vals))
        return worst

    def answer_rows(self) -> list[dict]:
        rows = []
        for t in self.timings:
            d, n, s = t.case.signature
            bi = t.case.bucket
            label = self.config.buckets[bi].label if bi >= 0 else ""
            row = {"case": t.case.id, "bucket": label,
                   "d": d, "n": n, "s": s}
            for eng in self.config.engines:
                x = t.times.get(eng)
                row[f"{eng}_us"] = TIMEOUT if x is None else f"{x * 1e6:.2f}"
                p = t.probs.get(eng)
                row[f"{eng}_prob"] = "" if p is None else repr(p)
            rows.append(row)
        return rows


def percentile_gain_ratio(t_method: float, t_ours: float) -> float:
    return (t_method - t_ours) / t_method


def percentile_gain(gains, p: float) -> float:
    """Largest g such that at least p% of answers have gain >= g."""
    ordered = sorted(gains)
    k = max(1, math.ceil(p * len(ordered) / 100.0))
    return ordered[len(ordered) - k]


def run_bench(cfg: BenchConfig, cases: Optional[list] = None, progress=None) -> BenchResult:
    rng = random.Random(cfg.seed)
    if cases is None:
        if cfg.generator == "dnf":
            cases = generate_dnf_cases(cfg, rng)
        elif cfg.generator == "graph":
            cases = generate_graph_cases(cfg, rng)
        else:
            raise ValueError(f"unknown generator {cfg.generator!r}")
    runners = engine_runners(cfg)
    timings = []
    for case in cases:
        if case.bucket < 0:
            d, n, _ = case.signature
            case.bucket = bucket_of(cfg.buckets, d, n)
        times, probs = {}, {}
        for eng in cfg.engines:
            try:
                med, _mean, p = time_call(runners[eng], case, cfg.repetitions, cfg.timeout_s)
            except OracleCapExceeded:
                med, p = None, None
            times[eng], probs[eng] = med, p
        timings.append(CaseTiming(case, times, probs))
        if progress:
            progress(case)
    return BenchResult(cfg, timings)


def to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def write_outputs(result: BenchResult, out_dir, figures: bool = True) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "buckets": out / "buckets.csv",
        "gains": out / "gains.csv",
        "answers": out / "answers.csv",
        "summary": out / "summary.json",
    }
    paths["buckets"].write_text(to_csv(result.bucket_rows()))
    paths["gains"].write_text(to_csv(result.gain_rows()))
    paths["answers"].write_text(to_csv(result.answer_rows()))
    summary = {
        "cases": len(result.timings),
        "totals_s": result.totals(),
        "max_prob_disagreement": result.max_prob_disagreement(),
        "config": _jsonable(asdict(result.config)),
    }
    paths["summary"].write_text(json.dumps(summary, indent=2))
    if figures:
        from . import plotting

        paths["bucket_times"] = plotting.plot_bucket_times(result, out / "bucket_times.png")
        paths["percentile_gains"] = plotting.plot_percentile_gains(result, out / "percentile_gains.png")
    return paths


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x
