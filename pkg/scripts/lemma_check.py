"""Monte Carlo check of the uniform deviation bounds on random finite instances.

Usage: python3 scripts/lemma_check.py [--m 16] [--size 12] [--n 50 200] [--trials 200]
"""

import argparse

from abstain_al.distribution import random_distribution
from abstain_al.hypotheses import random_class
from abstain_al.risk import verify_uniform_bounds


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=16)
    ap.add_argument("--size", type=int, default=12)
    ap.add_argument("--n", type=int, nargs="+", default=[50, 200, 1000])
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--p", type=float, default=0.25)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--instances", type=int, default=3)
    args = ap.parse_args(argv)

    print("instance,n,vc_uniform_1,vc_uniform_2,chow_uniform")
    for i in range(args.instances):
        cls = random_class(args.m, args.size, seed=i)
        dist = random_distribution(args.m, seed=i)
        for n in args.n:
            fr = verify_uniform_bounds(cls, dist, n, args.delta, args.trials, p=args.p, seed=i).fractions()
            print(f"{i},{n},{fr['vc_uniform_1']:.3f},{fr['vc_uniform_2']:.3f},{fr['chow_uniform']:.3f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
