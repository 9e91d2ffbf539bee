"""Label-complexity curves for the active learner and the passive baseline.

Usage: python3 scripts/savings_curve.py [--config scripts/configs/savings.json] [--out curve.csv]
"""

import argparse
import csv
import math
import sys
from pathlib import Path

from abstain_al.harness import ExperimentConfig, check_guarantee, label_complexity_curve, run_experiment

HERE = Path(__file__).resolve().parent


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(HERE / "configs" / "savings.json"))
    ap.add_argument("--sweep-out", help="also write the per-run CSV here")
    ap.add_argument("--out", help="curve CSV (stdout if omitted)")
    ap.add_argument("--workers", type=int)
    ap.add_argument("--min-seeds", type=int, default=10)
    args = ap.parse_args(argv)

    cfg = ExperimentConfig.load(args.config)
    res = run_experiment(cfg, args.sweep_out, workers=args.workers)
    curve = label_complexity_curve(res, min_seeds=args.min_seeds)

    out = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.DictWriter(out, fieldnames=list(curve[0]))
    w.writeheader()
    w.writerows(curve)
    if args.out:
        out.close()

    eps = sorted(cfg.epsilons)
    lo, hi = eps[-1], eps[0]
    for algo in cfg.algorithms:
        med = {r["epsilon"]: r["median"] for r in curve if r["algorithm"] == algo}
        if med.get(lo) and med.get(hi) is not None:
            print(f"{algo}: median labels grew by {med[hi] / med[lo]:.2f} from eps={lo} to eps={hi}", file=sys.stderr)
    print(f"polylog reference: {(math.log(1 / hi) / math.log(1 / lo)) ** 2:.2f}", file=sys.stderr)
    if "active_abstain" in cfg.algorithms and cfg.ceiling:
        rows = [r for r in res.rows if r["algorithm"] == "active_abstain"]
        print(check_guarantee(rows, "thm31_ceiling").summary(), file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
