"""Firing rate of the diameter trigger and sign of the excess risk as the sample grows.

Usage: python3 scripts/negativity_scan.py [--config scripts/configs/negativity.json] [--log2n 12 16 20 24]
"""

import argparse
import json
from pathlib import Path

import numpy as np

from abstain_al.harness import ExperimentConfig, run_experiment

HERE = Path(__file__).resolve().parent


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(HERE / "configs" / "negativity.json"))
    ap.add_argument("--log2n", type=int, nargs="+", default=[12, 16, 20, 22, 24])
    ap.add_argument("--seeds", type=int, default=50)
    args = ap.parse_args(argv)

    base = json.loads(Path(args.config).read_text())
    print("n,fired,negative_when_fired,mean_excess")
    for k in args.log2n:
        cfg = ExperimentConfig.from_json({**base, "n": 2**k, "seeds": args.seeds})
        rows = run_experiment(cfg).rows
        fired = [r for r in rows if r["triggered"]]
        neg = np.mean([r["excess_chow"] < 0 for r in fired]) if fired else float("nan")
        print(f"{2**k},{len(fired) / len(rows):.3f},{neg:.3f},{np.mean([r['excess_chow'] for r in rows]):.5f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
