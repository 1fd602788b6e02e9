"""Measure how often the configuration model yields a simple formula (no repeated variable in a clause)."""

import argparse
import math

import numpy as np

from regksat.formula_gen import generate, shape_from


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--r", type=int, default=3)
    ap.add_argument("--n", type=int, nargs="+", default=[6, 30, 150, 600])
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print("n,simple_fraction,stderr")
    for n in args.n:
        shape = shape_from(args.k, n, r=args.r)
        hits = np.fromiter(
            (generate(shape, args.seed + i).simple for i in range(args.samples)), bool, args.samples
        )
        p = hits.mean()
        print(f"{n},{p:.5f},{math.sqrt(p * (1 - p) / args.samples):.5f}")


if __name__ == "__main__":
    main()
