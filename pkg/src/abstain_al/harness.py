"""Seeded experiment sweeps, label-complexity curves and guarantee checks."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import ComplexityProfile, class_diameter, complexity_profile, excess_report, theorem31_label_ceiling
from .distribution import LabeledDistribution, LabeledSample, LabelOracle, Pool, distribution_from_json
from .hypotheses import HypothesisClass, class_from_json
from .learners import (
    TRIGGER_CONSTANT,
    active_abstain,
    compute_schedule,
    finite_diameter,
    majority_sample_sizes,
    midpoint_algorithm,
    passive_erm_baseline,
    passive_labels_to_reach,
)
from .risk import clog

ALGORITHMS = ("midpoint", "active_abstain", "finite_diameter", "passive")
WORKERS_ENV = "ABSTAIN_AL_WORKERS"

COLUMNS = [
    "config_hash", "grid_index", "seed", "run_seed", "algorithm", "epsilon", "delta", "p", "h", "n", "d",
    "labels_used", "oracle_requests", "excess_chow", "excess_r0", "excess_binary", "abstain_mass",
    "confident_abstain_mass", "triggered", "terminal_iteration", "J", "diameter", "alpha", "ceiling",
    "extra_requests", "max_extra_per_point", "extra_cap", "abstention_points", "wall_time",
]


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("invalid config: " + "; ".join(problems))


def _as_list(v):
    if v is None:
        return []
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _seed_list(v) -> list[int]:
    if v is None:
        return []
    if isinstance(v, dict):
        return list(range(int(v.get("start", 0)), int(v["stop"])))
    if isinstance(v, int):
        return list(range(v))
    return [int(s) for s in v]


@dataclass
class ExperimentConfig:
    class_spec: dict
    distribution: dict
    algorithms: list[str]
    epsilons: list[float] = field(default_factory=lambda: [0.1])
    delta: float = 0.05
    p: float | None = None
    h: float | None = None
    n: int | None = None
    seeds: list[int] = field(default_factory=list)
    workers: int = 1
    passive_max_labels: int = 2**24
    ceiling: bool = True
    debug: bool = False
    name: str = ""

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        known = {
            "class", "distribution", "algorithm", "epsilon", "delta", "p", "h", "n", "seed", "seeds",
            "workers", "passive_max_labels", "ceiling", "debug", "name",
        }
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError([f"unknown field {k!r}" for k in unknown])
        seeds = data.get("seeds", data.get("seed"))
        cfg = cls(
            class_spec=data.get("class"),
            distribution=data.get("distribution"),
            algorithms=[str(a) for a in _as_list(data.get("algorithm"))],
            epsilons=[float(e) for e in _as_list(data.get("epsilon", 0.1))],
            delta=float(data.get("delta", 0.05)),
            p=None if data.get("p") is None else float(data["p"]),
            h=None if data.get("h") is None else float(data["h"]),
            n=None if data.get("n") is None else int(data["n"]),
            seeds=_seed_list(seeds),
            workers=int(data.get("workers", os.environ.get(WORKERS_ENV, 1))),
            passive_max_labels=int(data.get("passive_max_labels", 2**24)),
            ceiling=bool(data.get("ceiling", True)),
            debug=bool(data.get("debug", False)),
            name=str(data.get("name", "")),
        )
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_json(json.loads(Path(path).read_text()))

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "class": self.class_spec,
            "distribution": self.distribution,
            "algorithm": self.algorithms,
            "epsilon": self.epsilons,
            "delta": self.delta,
            "p": self.p,
            "h": self.h,
            "n": self.n,
            "seeds": self.seeds,
            "passive_max_labels": self.passive_max_labels,
            "ceiling": self.ceiling,
            "debug": self.debug,
        }

    @property
    def config_hash(self) -> str:
        # only fields that change a run's draws or outputs; adding seeds keeps earlier runs intact
        data = {k: v for k, v in self.to_json().items() if k not in ("name", "seeds", "ceiling", "debug")}
        blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def validate(self) -> None:
        problems = []
        if not isinstance(self.class_spec, dict):
            problems.append("class: missing or not an object")
        if not isinstance(self.distribution, dict):
            problems.append("distribution: missing or not an object")
        if not self.algorithms:
            problems.append("algorithm: at least one algorithm is required")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                problems.append(f"algorithm: unknown {a!r}")
        if not 0 < self.delta <= 1:
            problems.append("delta: must lie in (0, 1]")
        for e in self.epsilons:
            if not 0 < e <= 1:
                problems.append(f"epsilon: {e} not in (0, 1]")
        if self.p is not None and not 0 < self.p <= 0.5:
            problems.append("p: must lie in (0, 1/2]")
        if self.h is not None and not 0 < self.h <= 1:
            problems.append("h: must lie in (0, 1]")
        if {"midpoint", "active_abstain"} & set(self.algorithms) and self.p is None:
            problems.append("p: required by midpoint/active_abstain")
        if "finite_diameter" in self.algorithms and self.h is None:
            problems.append("h: required by finite_diameter")
        if "midpoint" in self.algorithms and (self.n is None or self.n < 1):
            problems.append("n: a positive sample size is required by midpoint")
        if self.workers < 1:
            problems.append("workers: must be positive")
        if not problems:
            try:
                cls = class_from_json(self.class_spec)
                dist = distribution_from_json(self.distribution)
                if cls.m != dist.m:
                    problems.append("class and distribution have different support sizes")
            except (KeyError, TypeError, ValueError) as exc:
                problems.append(f"instance: {exc}")
        if problems:
            raise ConfigError(problems)

    def grid(self) -> list[tuple[str, float]]:
        return [(a, e) for a in self.algorithms for e in self.epsilons]


def run_seed(config_hash: str, grid_index: int, seed: int) -> int:
    digest = hashlib.sha256(f"{config_hash}:{grid_index}:{seed}".encode()).hexdigest()
    return int(digest[:16], 16)


@lru_cache(maxsize=8)
def _instance(class_json: str, dist_json: str) -> tuple[HypothesisClass, LabeledDistribution]:
    return class_from_json(json.loads(class_json)), distribution_from_json(json.loads(dist_json))


@lru_cache(maxsize=8)
def _profile(class_json: str, dist_json: str) -> ComplexityProfile:
    cls, dist = _instance(class_json, dist_json)
    return complexity_profile(cls, dist.px, star=False)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        return repr(v)
    return v


def run_single(config: ExperimentConfig, grid_index: int, seed: int) -> dict:
    """Execute one (grid point, seed) run and return its CSV row."""
    algorithm, epsilon = config.grid()[grid_index]
    cj, dj = json.dumps(config.class_spec, sort_keys=True), json.dumps(config.distribution, sort_keys=True)
    cls, dist = _instance(cj, dj)
    rs = run_seed(config.config_hash, grid_index, seed)
    start = time.perf_counter()
    d = max(cls.vc(), 1)
    row = dict.fromkeys(COLUMNS)
    row.update(
        config_hash=config.config_hash, grid_index=grid_index, seed=seed, run_seed=rs, algorithm=algorithm,
        epsilon=epsilon, delta=config.delta, p=config.p, h=dist.massart_margin(), n=config.n, d=d,
    )
    pool, oracle = Pool(dist, rs), LabelOracle(dist, rs)
    p_eval = config.p if config.p is not None else 0.0

    if algorithm == "midpoint":
        sample = LabeledSample.draw(pool, oracle, config.n)
        out, vs, diameter = midpoint_algorithm(cls, sample, config.p, config.delta, d)
        a = vs.defining_radius.value
        row.update(diameter=diameter, alpha=a, triggered=diameter >= TRIGGER_CONSTANT * a / config.p, labels_used=sample.n)
    elif algorithm == "active_abstain":
        schedule = compute_schedule(epsilon, config.delta, config.p, d)
        out, tr = active_abstain(cls, pool, oracle, schedule, debug=config.debug)
        last = tr.iterations[-1]
        row.update(
            labels_used=tr.total_requests, triggered=tr.triggered, terminal_iteration=tr.terminal_iteration,
            J=schedule.J, diameter=last.diameter, alpha=last.alpha,
        )
        if config.ceiling:
            row["ceiling"] = theorem31_label_ceiling(tr, _profile(cj, dj), schedule).bound
    elif algorithm == "finite_diameter":
        h = config.h
        p_eval = h / 2
        row["p"] = p_eval
        out, tr = finite_diameter(cls, pool, oracle, h, epsilon, config.delta, d, debug=config.debug)
        _, cap = majority_sample_sizes(max(class_diameter(cls), 1), h, epsilon, config.delta)
        row.update(
            labels_used=tr.total_requests, triggered=tr.triggered, terminal_iteration=tr.terminal_iteration,
            extra_requests=tr.extra_requests, extra_cap=cap,
            max_extra_per_point=max(tr.extra_queries_per_point.values(), default=0),
            abstention_points=len(tr.abstention_points),
        )
    else:
        if config.n is not None:
            out, used = passive_erm_baseline(cls, dist, config.n, rs)
            row["labels_used"] = used
            oracle.requests_made = used
        else:
            used, out = passive_labels_to_reach(cls, dist, epsilon, rs, config.passive_max_labels)
            row["labels_used"] = used
            oracle.requests_made = used

    row["oracle_requests"] = oracle.requests_made
    row.update(excess_report(out, cls, dist, p_eval))
    row.pop("best_risk", None)
    row["wall_time"] = round(time.perf_counter() - start, 4)
    return {k: row[k] for k in COLUMNS}


def _run_task(args):
    config, gi, seed = args
    return run_single(config, gi, seed)


@dataclass
class SweepResult:
    config: ExperimentConfig | None
    rows: list[dict]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=COLUMNS)
            w.writeheader()
            for r in self.rows:
                w.writerow({k: _fmt(r.get(k)) for k in COLUMNS})

    @classmethod
    def read_csv(cls, path) -> "SweepResult":
        with open(path, newline="") as fh:
            return cls(None, [_parse_row(r) for r in csv.DictReader(fh)])


def _parse_row(raw: dict) -> dict:
    row = {}
    for k, v in raw.items():
        if v == "" or v is None:
            row[k] = None
        elif k in ("config_hash", "algorithm"):
            row[k] = v
        else:
            try:
                row[k] = int(v)
            except ValueError:
                row[k] = float(v)
    return row


def run_experiment(config: ExperimentConfig, out_path=None, workers: int | None = None) -> SweepResult:
    """Run every (grid point, seed) pair; stream rows to ``out_path`` if given."""
    tasks = [(config, gi, s) for gi in range(len(config.grid())) for s in config.seeds]
    workers = workers or config.workers
    rows = []
    fh = writer = None
    if out_path is not None:
        fh = open(out_path, "w", newline="")
        writer = csv.DictWriter(fh, fieldnames=COLUMNS)
        writer.writeheader()
        fh.flush()
    try:
        if workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=workers) as ex:
                results = ex.map(_run_task, tasks)
                for r in results:
                    rows.append(r)
                    if writer:
                        writer.writerow({k: _fmt(r.get(k)) for k in COLUMNS})
                        fh.flush()
        else:
            for t in tasks:
                r = _run_task(t)
                rows.append(r)
                if writer:
                    writer.writerow({k: _fmt(r.get(k)) for k in COLUMNS})
                    fh.flush()
    finally:
        if fh:
            fh.close()
    if out_path is not None:
        write_sidecar(config, Path(out_path).with_suffix(".json"))
    return SweepResult(config, rows)


def write_sidecar(config: ExperimentConfig, path) -> None:
    cj, dj = json.dumps(config.class_spec, sort_keys=True), json.dumps(config.distribution, sort_keys=True)
    cls, _ = _instance(cj, dj)
    profile = _profile(cj, dj) if len(cls) <= 2048 else None
    meta = {
        "config": config.to_json(),
        "config_hash": config.config_hash,
        "version": __version__,
        "profile": profile.to_json() if profile else None,
    }
    Path(path).write_text(json.dumps(meta, indent=2))


# --------------------------------------------------------------------------
# curves


MIN_CURVE_SEEDS = 10


def label_complexity_curve(
    sweep: SweepResult, seeds_expected: list[int] | None = None, min_seeds: int = MIN_CURVE_SEEDS
) -> list[dict]:
    """Per (algorithm, epsilon): median and quartiles of labels used.

    Passive runs that never reached the target are counted in ``unreached``
    and left out of the quantiles.
    """
    groups: dict[tuple[str, float], list] = {}
    for r in sweep.rows:
        groups.setdefault((r["algorithm"], float(r["epsilon"])), []).append(r)
    gaps = []
    if seeds_expected is None and sweep.config is not None:
        seeds_expected = sweep.config.seeds
    if sweep.config is not None:
        for a, e in sweep.config.grid():
            groups.setdefault((a, float(e)), [])
    out = []
    for (a, e), rows in sorted(groups.items(), key=lambda kv: (kv[0][0], -kv[0][1])):
        have = {r["seed"] for r in rows}
        if len(have) < min_seeds:
            gaps.append(f"{a} eps={e}: {len(have)} seeds, need {min_seeds}")
        if seeds_expected is not None:
            missing = sorted(set(seeds_expected) - have)
            if missing:
                gaps.append(f"{a} eps={e}: seeds {missing}")
        labels = np.array([r["labels_used"] for r in rows if r["labels_used"] is not None], dtype=float)
        q1, med, q3 = np.quantile(labels, [0.25, 0.5, 0.75]) if len(labels) else (math.nan,) * 3
        out.append(
            {"algorithm": a, "epsilon": e, "runs": len(rows), "unreached": len(rows) - len(labels),
             "median": med, "q1": q1, "q3": q3}
        )
    if gaps:
        raise ValueError("missing runs: " + "; ".join(gaps))
    return out


# --------------------------------------------------------------------------
# guarantees

GUARANTEES = {
    "thm32_bound": ("midpoint",),
    "negativity_trigger": ("midpoint", "active_abstain"),
    "prop4": ("active_abstain",),
    "prop5": ("midpoint",),
    "thm31_ceiling": ("active_abstain",),
    "thm41_excess": ("finite_diameter",),
}


@dataclass
class GuaranteeReport:
    guarantee: str
    runs: int
    pass_fraction: float
    threshold: float
    per_run: list[dict]
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.pass_fraction >= self.threshold

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.note})" if self.note else ""
        return f"{status} {self.guarantee}: {self.pass_fraction:.4f} >= {self.threshold:.4f} over {self.runs} runs{extra}"


def prop5_bound(n: int, p: float, delta: float, d: int) -> float:
    return 592 / (n * p * p) * (3 * d * clog(math.e * max(2 * n, d) / d) + clog(56 / delta))


def _check_row(guarantee: str, r: dict) -> bool:
    eps, p = r["epsilon"], r["p"]
    if guarantee == "thm32_bound":
        a, D = r["alpha"], r["diameter"]
        return r["excess_chow"] <= 8 * a * a + 12 * a * D - p / 4 * D * D
    if guarantee == "negativity_trigger":
        return r["excess_chow"] < 0
    if guarantee == "prop4":
        h = r["h"]
        return r["abstain_mass"] <= 4 * eps / h and r["excess_r0"] <= 2 * eps
    if guarantee == "prop5":
        return r["confident_abstain_mass"] <= prop5_bound(r["n"], p, r["delta"], r["d"])
    if guarantee == "thm31_ceiling":
        if r["ceiling"] is None:
            raise ValueError("sweep rows carry no ceiling column")
        return r["labels_used"] <= r["ceiling"]
    if guarantee == "thm41_excess":
        return r["excess_binary"] <= eps and r["max_extra_per_point"] <= r["extra_cap"]
    raise ValueError(f"unknown guarantee {guarantee!r}")


def check_guarantee(sweep: SweepResult | list[dict], guarantee: str) -> GuaranteeReport:
    """Fraction of runs on which the guarantee's inequality holds, from exact risks."""
    if guarantee not in GUARANTEES:
        raise ValueError(f"unknown guarantee {guarantee!r}")
    rows = sweep.rows if isinstance(sweep, SweepResult) else list(sweep)
    allowed = GUARANTEES[guarantee]
    bad = sorted({r["algorithm"] for r in rows} - set(allowed))
    if bad:
        raise ValueError(f"guarantee {guarantee} does not apply to algorithm(s) {bad}")
    note = ""
    if guarantee == "prop4":
        for r in rows:
            if not (r["h"] > 0 and r["p"] <= r["h"] / 4 + 1e-12):
                raise ValueError("prop4 needs a Massart margin h > 0 and p <= h/4")
    if guarantee == "negativity_trigger":
        rows = [r for r in rows if r["triggered"]]
        note = f"{len(rows)} firings"
    per_run = [{"seed": r["seed"], "grid_index": r["grid_index"], "pass": bool(_check_row(guarantee, r))} for r in rows]
    threshold = 1 - max((r["delta"] for r in rows), default=0.0)
    frac = sum(x["pass"] for x in per_run) / len(per_run) if per_run else 1.0
    return GuaranteeReport(guarantee, len(per_run), frac, threshold, per_run, note)
