"""Seeded batch experiments and report emission."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import __version__
from .boolfn import QuadraticForm, dual_bent, ip, shift, to_table
from .gf2 import BitVector, dickson_decompose, rank, random_invertible, random_symplectic
from .gowers import gowers_norm
from .hidden_shift import (
    Oracle,
    RecoveryFailed,
    ShiftInstance,
    alg1_bent_shift,
    brute_force_shift,
    classical_quadratic_learner,
    find_close_quadratic,
    shifted_large_u3,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "SUBCOMMANDS",
    "generate_instance",
    "run",
    "trial_rng",
    "wilson_interval",
    "loglog_slope",
    "render",
    "parse_csv_aggregates",
]

SCHEMA = "report_v1"
SUBCOMMANDS = ("alg1", "find-quad", "shifted-u3", "gowers", "dickson", "bench-queries")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    subcommand: str
    n: int | list[int] = 4
    trials: int = 100
    seed: int = 0
    delta_f: float = 0.0
    delta_g: float = 0.0
    k: int | None = None
    r: int = 20
    t: int = 15
    rank_h: int | None = None
    max_attempts: int = 5
    out: str | None = None
    format: str = "json"
    workers: int = 1
    timing: bool = False

    @property
    def sizes(self) -> list[int]:
        return list(self.n) if isinstance(self.n, list) else [self.n]

    def validate(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if any(n < 1 for n in self.sizes):
            raise ConfigError("n must be positive")
        if isinstance(self.n, list) and self.subcommand != "bench-queries":
            raise ConfigError("a range of n is only meaningful for bench-queries")
        for name in ("delta_f", "delta_g"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.r < 1 or self.t < 1 or self.max_attempts < 1 or self.workers < 1:
            raise ConfigError("r, t, max_attempts and workers must be positive")
        for n in self.sizes:
            h = self.rank_h if self.rank_h is not None else n // 2
            if h < 0 or 2 * h > n:
                raise ConfigError(f"rank_h={h} needs 2h <= n={n}")
            if self.subcommand == "alg1" and (n % 2 or 2 * h != n):
                raise ConfigError("alg1 needs even n and a full-rank (bent) instance")
            if self.subcommand == "shifted-u3" and self.rank_h is None and n % 2:
                raise ConfigError("bent-mode shifted-u3 needs even n; pass --rank-h otherwise")
            if self.subcommand in ("find-quad", "bench-queries") and self.k is not None and self.k < n:
                raise ConfigError(f"k={self.k} must be at least n={n}")
        if self.subcommand == "gowers" and self.k is not None and not 1 <= self.k <= 4:
            raise ConfigError("gowers order k must be between 1 and 4")


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for trial ``index``: master seed XOR trial counter."""
    return np.random.default_rng(seed ^ index)


def generate_instance(
    n: int,
    noise: tuple[float, float] = (0.0, 0.0),
    rank_h: int | None = None,
    seed: int | np.random.Generator = 0,
) -> ShiftInstance:
    """Random quadratic of half-rank ``rank_h`` with a planted shift.

    The form is ``ip_h(x R) + l x^t + b`` for uniformly random invertible R,
    l, b; the shift is uniform and each table gets its own exact-count
    flip noise.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    h = n // 2 if rank_h is None else rank_h
    if h < 0 or 2 * h > n:
        raise ValueError(f"rank_h={h} needs 2h <= n={n}")
    r = random_invertible(n, rng)
    form = QuadraticForm.from_matrix(
        r @ ip(h, n).q @ r.transpose(), BitVector.random(n, rng), int(rng.integers(0, 2))
    )
    s = BitVector.random(n, rng)
    return ShiftInstance.plant(to_table(form), s, noise[0], noise[1], rng, form=form)


# -- per-trial pipelines --------------------------------------------------


def _trial_alg1(cfg: ExperimentConfig, n: int, rng) -> dict:
    inst = generate_instance(n, (cfg.delta_f, cfg.delta_g), cfg.rank_h, rng)
    dual = Oracle(dual_bent(inst.base))
    found = alg1_bent_shift(inst, dual, rng)
    return {
        "shift": inst.shift.hex(),
        "candidate": found.hex(),
        "success": found == inst.shift,
        "queries": inst.query_counter_g + dual.queries,
    }


def _trial_find_quad(cfg: ExperimentConfig, n: int, rng) -> dict:
    inst = generate_instance(n, (cfg.delta_f, 0.0), cfg.rank_h, rng)
    record = {"form": inst.form.to_dict()}
    try:
        rec = find_close_quadratic(inst.f, cfg.k, cfg.max_attempts, rng, linear_samples=cfg.t)
        record.update(success=rec.form == inst.form, attempts=rec.attempts)
    except RecoveryFailed:
        record.update(success=False, attempts=cfg.max_attempts)
    record["queries"] = inst.query_counter_f
    return record


def _trial_shifted_u3(cfg: ExperimentConfig, n: int, rng) -> dict:
    inst = generate_instance(n, (cfg.delta_f, cfg.delta_g), cfg.rank_h, rng)
    truth = brute_force_shift(inst.base, shift(inst.base, inst.shift), up_to_sign=True)
    record = {"shift": inst.shift.hex()}
    try:
        res = shifted_large_u3(
            inst, rng, k=cfg.k, swap_rounds=cfg.r, max_attempts=cfg.max_attempts,
            linear_samples=cfg.t,
        )
    except RecoveryFailed:
        record.update(success=False, verified=False, correct=False, recovered=False,
                      swap_rejections=0, candidate=None)
    else:
        correct = res.candidate in truth
        record.update(
            recovered=True,
            candidate=res.candidate.hex(),
            verified=res.verified,
            correct=correct,
            swap_rejections=res.swap_rejections,
            success=res.verified and correct,
        )
    record["queries"] = inst.query_counter_f + inst.query_counter_g
    return record


def _trial_gowers(cfg: ExperimentConfig, n: int, rng) -> dict:
    inst = generate_instance(n, (cfg.delta_f, 0.0), cfg.rank_h, rng)
    order = 3 if cfg.k is None else cfg.k
    res = gowers_norm(inst.f_table, order)
    return {
        "k": order,
        "value": res.value,
        "raw_sum": str(res.raw_sum),
        "method": res.method,
        "success": abs(res.value - 1.0) <= 1e-12,
    }


def _trial_dickson(cfg: ExperimentConfig, n: int, rng) -> dict:
    b = random_symplectic(n, rng)
    dec = dickson_decompose(b)
    r = dec.r_matrix
    ok = r @ b @ r.transpose() == dec.normal_form and rank(r) == n
    rk = rank(b)
    return {
        "half_rank": dec.half_rank,
        "rank": rk,
        "success": bool(ok and rk % 2 == 0 and rk == 2 * dec.half_rank),
    }


def _trial_bench(cfg: ExperimentConfig, n: int, rng) -> dict:
    inst = generate_instance(n, (0.0, 0.0), cfg.rank_h, rng)
    classical = Oracle(inst.base)
    learned = classical_quadratic_learner(classical)
    quantum = Oracle(inst.base)
    k = 2 * n if cfg.k is None else cfg.k
    try:
        rec = find_close_quadratic(quantum, k, cfg.max_attempts, rng, linear_samples=cfg.t)
        q_ok, attempts = rec.form == inst.form, rec.attempts
    except RecoveryFailed:
        q_ok, attempts = False, cfg.max_attempts
    return {
        "n": n,
        "k": k,
        "classical_queries": classical.queries,
        "quantum_queries": quantum.queries,
        "attempts": attempts,
        "success": bool(learned == inst.form and q_ok),
    }


_PIPELINES: dict[str, Callable[[ExperimentConfig, int, np.random.Generator], dict]] = {
    "alg1": _trial_alg1,
    "find-quad": _trial_find_quad,
    "shifted-u3": _trial_shifted_u3,
    "gowers": _trial_gowers,
    "dickson": _trial_dickson,
    "bench-queries": _trial_bench,
}


def _run_one(args: tuple[ExperimentConfig, int, int]) -> dict:
    cfg, n, index = args
    record = _PIPELINES[cfg.subcommand](cfg, n, trial_rng(cfg.seed, index))
    record = {"trial": index, **record}
    record["success"] = bool(record["success"])
    return record


# -- aggregation ----------------------------------------------------------


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval; always contains the point estimate."""
    if trials == 0:
        return (0.0, 1.0)
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, min(p, centre - half)), min(1.0, max(p, centre + half)))


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    return float(np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)[0])


def _aggregate(cfg: ExperimentConfig, records: list[dict]) -> dict:
    successes = sum(r["success"] for r in records)
    low, high = wilson_interval(successes, len(records))
    agg = {
        "trials": len(records),
        "successes": successes,
        "success_rate": successes / len(records),
        "ci95_low": low,
        "ci95_high": high,
    }
    if records and "queries" in records[0]:
        agg["mean_queries"] = float(np.mean([r["queries"] for r in records]))
    if cfg.subcommand == "gowers":
        agg["mean_value"] = float(np.mean([r["value"] for r in records]))
    if cfg.subcommand == "bench-queries":
        sizes = cfg.sizes
        classical = [float(np.mean([r["classical_queries"] for r in records if r["n"] == n])) for n in sizes]
        quantum = [float(np.mean([r["quantum_queries"] for r in records if r["n"] == n])) for n in sizes]
        agg["classical_mean_queries"] = dict(zip(map(str, sizes), classical))
        agg["quantum_mean_queries"] = dict(zip(map(str, sizes), quantum))
        if len(sizes) > 1:
            agg["classical_slope"] = loglog_slope(sizes, classical)
            agg["quantum_slope"] = loglog_slope(sizes, quantum)
    return agg


def run(cfg: ExperimentConfig) -> dict:
    """Execute ``cfg.trials`` seeded trials (per n for bench-queries) and build the report."""
    cfg.validate()
    start = time.perf_counter()
    jobs = []
    for n in cfg.sizes:
        offset = len(jobs)
        jobs.extend((cfg, n, offset + j) for j in range(cfg.trials))
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * cfg.workers))))
    else:
        records = [_run_one(job) for job in jobs]
    report = {
        "schema": SCHEMA,
        "version": __version__,
        "config": {key: val for key, val in asdict(cfg).items() if key not in ("out", "workers", "timing")},
        "aggregates": _aggregate(cfg, records),
        "trials": records,
    }
    if cfg.timing:
        report["wall_clock_s"] = time.perf_counter() - start
    return report


def render(report: dict, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric", "value"])
    for key, value in sorted(_flatten(report["aggregates"]).items()):
        writer.writerow([key, json.dumps(value)])
    writer.writerow([])
    records = [_flatten(r) for r in report["trials"]]
    columns = sorted({c for r in records for c in r})
    writer.writerow(columns)
    for r in records:
        writer.writerow([json.dumps(r.get(c)) for c in columns])
    return buf.getvalue()


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for key, value in d.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(value, name + "."))
        else:
            out[name] = value
    return out


def parse_csv_aggregates(text: str) -> dict:
    """Read back the metric block of a CSV report."""
    rows = csv.reader(io.StringIO(text))
    next(rows)
    out = {}
    for row in rows:
        if not row:
            break
        out[row[0]] = json.loads(row[1])
    return out

