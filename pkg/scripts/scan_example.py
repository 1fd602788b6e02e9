"""Overlap scans on both sides of r* for k = 3, written as CSV next to a short summary."""

import argparse
from pathlib import Path

from regksat.second_moment import dominance_scan_strict


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="scans")
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--r", type=int, nargs="+", default=[3, 4, 5])
    ap.add_argument("--variant", default="sat")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for r in args.r:
        scan = dominance_scan_strict(args.k, r, args.variant)
        path = out / f"scan_k{args.k}_r{r}_{args.variant}.csv"
        scan.write_csv(path)
        g = ", ".join(f"{x:.4f}" for x in scan.argmax_off_center)
        print(f"r={r}: dominant={scan.dominant} margin={scan.margin:.6g} best competitor at {g} -> {path}")


if __name__ == "__main__":
    main()
