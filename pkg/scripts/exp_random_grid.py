#!/usr/bin/env python3
"""Random-grid benchmark: dense random product chains, n=100, rank 3."""

import argparse
import sys

from nneig.bench import ExperimentConfig, aggregate, render_rows, run_experiment


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--rank", type=int, default=3)
    p.add_argument("--density", type=float, default=0.9)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write table here instead of stdout")
    p.add_argument("--format", choices=("csv", "text"), default="text")
    p.add_argument("--no-timing", action="store_true")
    p.add_argument("--verbose", action="store_true")
    args = p.parse_args(argv)

    cfg = ExperimentConfig(kind="random-grid", n=args.n, rank=args.rank,
                           density=args.density, trials=args.trials,
                           seed=args.seed)
    per_trial = run_experiment(cfg, verbose=args.verbose)
    table = render_rows(aggregate(per_trial), args.format,
                        include_timing=not args.no_timing)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(table)
    else:
        sys.stdout.write(table)


if __name__ == "__main__":
    main()
