"""Pilot sweep for the order-selection constant of the coarse scheme.

Runs every order 1..max_order at one oversampling rate, reports the median
error per order and the constant that makes ``select_order`` pick the best
one. Paste the printed value into the ``c13`` entry of a frame-sweep config.
"""

import argparse
import math

from sdquant import analysis
from sdquant.frame_pipeline import FrameSweepConfig, frame_error_sweep, select_order


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--lam", type=float, default=400)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--max-order", type=int, default=7)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=6.0)
    p.add_argument("--family", default="gaussian")
    p.add_argument("--seed", type=int, default=10_000)
    args = p.parse_args()

    cfg = FrameSweepConfig(lambdas=[args.lam], trials=args.trials, k=args.k, scheme="coarse",
                           family=args.family, orders=list(range(1, args.max_order + 1)),
                           levels=args.levels, step=args.step, gamma=args.gamma, seed=args.seed)
    failures = []
    recs = frame_error_sweep(cfg, failures=failures)
    stats = analysis.error_summary(recs, lambda r: r.r, lambda r: r.error_l2)
    for r, s in stats.items():
        print(f"r={r}: median {s['median']:.3e}  p90 {s['p90']:.3e}")
    if failures:
        print(f"{len(failures)} runs failed, first: {failures[0]['error']}")
    best = min(stats, key=lambda r: stats[r]["median"])
    c13 = math.sqrt(args.lam) / (2 * best + 1)
    assert select_order(args.lam, c13) == best
    print(f"best order {best}; c13 = {c13!r}")


if __name__ == "__main__":
    main()
