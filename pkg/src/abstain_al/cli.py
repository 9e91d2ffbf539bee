"""``abstain-al`` command line: run, curve, check, profile, verify-lemmas."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .diagnostics import complexity_profile
from .distribution import distribution_from_json
from .harness import (
    GUARANTEES,
    MIN_CURVE_SEEDS,
    ConfigError,
    ExperimentConfig,
    SweepResult,
    check_guarantee,
    label_complexity_curve,
    run_experiment,
)
from .hypotheses import class_from_json
from .risk import verify_uniform_bounds


def _load_config(args) -> ExperimentConfig:
    data = json.loads(Path(args.config).read_text()) if args.config else {}
    # file values win; flags only fill gaps
    for flag, key in (("epsilon", "epsilon"), ("delta", "delta"), ("p", "p"), ("h", "h"), ("n", "n"), ("seeds", "seeds")):
        v = getattr(args, flag, None)
        if v is not None and key not in data:
            data[key] = v
    if getattr(args, "algorithm", None) and "algorithm" not in data:
        data["algorithm"] = args.algorithm
    return ExperimentConfig.from_json(data)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--algorithm", nargs="+")
    p.add_argument("--epsilon", type=float, nargs="+")
    p.add_argument("--delta", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--seeds", type=int, help="run seeds 0..SEEDS-1")


def cmd_run(args) -> int:
    cfg = _load_config(args)
    sweep = run_experiment(cfg, args.out, workers=args.workers)
    print(f"{len(sweep.rows)} runs written to {args.out}")
    return 0


def cmd_curve(args) -> int:
    if args.sweep:
        sweep = SweepResult.read_csv(args.sweep)
    else:
        sweep = run_experiment(_load_config(args), workers=args.workers)
    rows = label_complexity_curve(sweep, min_seeds=args.min_seeds)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.DictWriter(out, fieldnames=["algorithm", "epsilon", "runs", "unreached", "median", "q1", "q3"])
    w.writeheader()
    w.writerows(rows)
    if args.out:
        out.close()
    return 0


def cmd_check(args) -> int:
    sweep = SweepResult.read_csv(args.sweep)
    ok = True
    for g in args.guarantee:
        report = check_guarantee(sweep, g)
        print(report.summary())
        ok &= report.passed
    return 0 if ok else 1


def cmd_profile(args) -> int:
    data = json.loads(Path(args.config).read_text())
    cls = class_from_json(data["class"])
    dist = distribution_from_json(data["distribution"])
    eps = tuple(args.eps) if args.eps else None
    prof = complexity_profile(cls, dist.px, eps) if eps else complexity_profile(cls, dist.px)
    print(json.dumps(prof.to_json(), indent=2))
    return 0


def cmd_verify(args) -> int:
    data = json.loads(Path(args.config).read_text())
    cls = class_from_json(data["class"])
    dist = distribution_from_json(data["distribution"])
    res = verify_uniform_bounds(cls, dist, args.n, args.delta, args.trials, p=args.p, seed=args.seed)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(res.rows[0]) if res.rows else ["trial"])
            w.writeheader()
            w.writerows(res.rows)
    ok = True
    for name, frac in res.fractions().items():
        passed = frac >= 1 - 2 * args.delta
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'} {name}: {frac:.4f} over {res.trials} trials")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="abstain-al", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a seeded sweep and write CSV + sidecar JSON")
    _add_config_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("curve", help="label-complexity quantiles per algorithm and epsilon")
    _add_config_flags(p)
    p.add_argument("--sweep", help="aggregate an existing sweep CSV instead of running")
    p.add_argument("--min-seeds", type=int, default=MIN_CURVE_SEEDS)
    p.add_argument("--out")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("check", help="evaluate guarantees on a sweep; exit 0 iff all pass")
    p.add_argument("--sweep", required=True)
    p.add_argument("--guarantee", action="append", required=True, choices=sorted(GUARANTEES))
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("profile", help="exact complexity measures of an instance")
    p.add_argument("--config", required=True)
    p.add_argument("--eps", type=float, nargs="+")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("verify-lemmas", help="Monte Carlo check of the uniform deviation bounds")
    p.add_argument("--config", required=True)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--p", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
