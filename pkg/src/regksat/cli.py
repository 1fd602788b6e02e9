"""Command line: ``regksat {bounds,scan,gen,verify,moments}``."""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction

from . import verify as verify_mod
from .ensemble import Variant, as_fraction, make_profile, make_shape
from .errors import Inconclusive, NonRealizable, RegKSatError, TooLarge
from .exact_oracle import (
    enumerate_tiny,
    exact_first_moment,
    exact_second_moment_2reg,
    exact_second_moment_strict,
    monte_carlo_moments,
)
from .first_moment import upper_bound_alpha
from .formula_gen import write_batch
from .second_moment import dominance_scan_2reg, dominance_scan_strict, find_r_star

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3
DEEP_K = 10  # rows above this need --deep


class UsageError(Exception):
    pass


def fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, int):
        return str(x)
    return f"{x:.6g}"


def _k_arg(text: str) -> int:
    k = int(text)
    if k < 3:
        raise argparse.ArgumentTypeError(f"clause width must be >= 3, got {k}")
    return k


def _alpha_arg(text: str) -> Fraction:
    try:
        a = as_fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"density must be NUM/DEN or a decimal, got {text!r}") from None
    if a <= 0:
        raise argparse.ArgumentTypeError("density must be positive")
    return a


def _emit(payload: dict, as_json: bool, text: str, out=None):
    if as_json:
        out = out or sys.stdout
        json.dump(payload, out, indent=2, default=str)
        out.write("\n")
    else:
        print(text)


def uniform_lower(k: int) -> float:
    """Lower bound known for uniform random k-SAT, for comparison."""
    return 2.0**k * math.log(2) - (k + 1) * math.log(2) / 2 - 1


# --- bounds --------------------------------------------------------------


def bounds_row(k: int, variants, deep: bool, assume_monotone: bool) -> dict:
    row = {"k": k, "status": "ok", "notes": []}
    t0 = time.perf_counter()
    for v in variants:
        prefix = "" if v is Variant.SAT else "nae_"
        row[prefix + "alpha_u"] = upper_bound_alpha(k, v)
        row[prefix + "r_star"] = None
        row[prefix + "alpha_l"] = None
        if k > DEEP_K and not deep:
            row["status"] = "partial"
            row["notes"].append(f"{v}: r* skipped for k > {DEEP_K}; pass --deep")
            continue
        try:
            rep = find_r_star(k, v, assume_monotone=assume_monotone or k > DEEP_K)
        except Inconclusive as exc:
            row["status"] = "inconclusive"
            row["notes"].append(f"{v}: {exc}")
            continue
        row[prefix + "r_star"] = rep.r_star
        row[prefix + "alpha_l"] = float(rep.alpha_l)
        row[prefix + "alpha_l_exact"] = str(rep.alpha_l)
        row[prefix + "search"] = rep.method
    if row.get("alpha_l") is not None:
        row["gap_to_uniform_lower"] = uniform_lower(k) - row["alpha_l"]
    else:
        row["gap_to_uniform_lower"] = None
    row["seconds"] = round(time.perf_counter() - t0, 3)
    return row


BOUNDS_COLUMNS = [
    ("k", "k"),
    ("r_star", "r*"),
    ("alpha_l", "alpha_l"),
    ("alpha_u", "alpha_u"),
    ("gap_to_uniform_lower", "uni-alpha_l"),
    ("nae_r_star", "r*_NAE"),
    ("nae_alpha_l", "alpha_l_NAE"),
    ("nae_alpha_u", "alpha_u_NAE"),
]


def bounds_text(payload: dict) -> str:
    cols = [(key, head) for key, head in BOUNDS_COLUMNS if any(key in r for r in payload["rows"])]
    table = [[head for _, head in cols]]
    for r in payload["rows"]:
        table.append([fmt(r.get(key)) for key, _ in cols])
    widths = [max(len(row[i]) for row in table) for i in range(len(cols))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in table]
    for r in payload["rows"]:
        for note in r["notes"]:
            lines.append(f"# k={r['k']} {r['status']}: {note}")
    return "\n".join(lines)


def cmd_bounds(args) -> int:
    variants = [Variant.SAT, Variant.NAE] if args.variant == "both" else [Variant.parse(args.variant)]
    rows = [bounds_row(k, variants, args.deep, args.assume_monotone) for k in args.k]
    payload = {"schema": "regksat.bounds", "version": SCHEMA_VERSION, "rows": rows}
    _emit(payload, args.json, bounds_text(payload))
    if any(r["status"] == "inconclusive" for r in rows):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# --- scan ----------------------------------------------------------------


def _density(args, k):
    if (args.r is None) == (args.alpha is None):
        raise UsageError("give exactly one of --r and --alpha")
    if args.r is not None:
        if args.r < 1:
            raise UsageError("--r must be >= 1")
        return Fraction(2 * args.r, k)
    return args.alpha


def cmd_scan(args) -> int:
    alpha = _density(args, args.k)
    prof = make_profile(args.k, alpha)
    if prof.strictly_regular:
        scan = dominance_scan_strict(args.k, prof.r_floor, args.variant, args.resolution or 1e-3)
    else:
        scan = dominance_scan_2reg(args.k, alpha, args.variant, args.resolution or 1 / 200)
    if args.out:
        scan.write_csv(args.out)
    elif not args.json:
        sys.stdout.write(scan.to_csv())
    summary = scan.summary()
    payload = {"schema": "regksat.scan", "version": SCHEMA_VERSION, **summary, "csv": args.out}
    where = ", ".join(fmt(g) for g in scan.argmax_off_center)
    text = (
        f"# dominant={str(scan.dominant).lower()} margin={fmt(scan.margin)} "
        f"center={fmt(scan.center_value)} max_off_center={fmt(scan.max_off_center)} at ({where})"
    )
    _emit(payload, args.json, text)
    return EXIT_INCONCLUSIVE if scan.inconclusive else EXIT_OK


# --- gen -----------------------------------------------------------------


def cmd_gen(args) -> int:
    shape = make_shape(make_profile(args.k, _density(args, args.k)), args.n)
    manifest = write_batch(shape, args.count, args.seed, args.out, simple_only=args.simple_only)
    text = (
        f"wrote {args.count} instances to {args.out} "
        f"(simple fraction {fmt(manifest['simple_fraction'])})"
    )
    _emit(manifest, args.json, text)
    return EXIT_OK


# --- verify --------------------------------------------------------------


def cmd_verify(args) -> int:
    checks = verify_mod.run(args.level, args.seed)
    ok = all(c.passed for c in checks)
    payload = {
        "schema": "regksat.verify",
        "version": SCHEMA_VERSION,
        "level": args.level,
        "seed": args.seed,
        "passed": ok,
        "checks": [c.to_dict() for c in checks],
    }
    lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail} ({c.seconds:.1f}s)" for c in checks]
    for c in checks:
        if not c.passed:
            lines += [f"    {item}" for item in c.items if not item.get("match", True)]
    _emit(payload, args.json, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


# --- moments -------------------------------------------------------------


def cmd_moments(args) -> int:
    shape = make_shape(make_profile(args.k, _density(args, args.k)), args.n)
    v = Variant.parse(args.variant)
    out = {
        "schema": "regksat.moments",
        "version": SCHEMA_VERSION,
        "shape": {"k": shape.k, "n": shape.n, "m": shape.m, "n_r": shape.n_r, "n_r1": shape.n_r1,
                  "edge_count": shape.edge_count},
        "first": exact_first_moment(shape, v).to_dict(),
    }
    if args.second:
        if shape.n_r and shape.n_r1:
            out["second"] = exact_second_moment_2reg(shape, v).to_dict()
        else:
            out["second"] = exact_second_moment_strict(shape, v).to_dict()
    if args.enumerate:
        e = enumerate_tiny(shape, v)
        out["enumeration"] = {
            "sat_formula_count": str(e.sat_formula_count),
            "total": str(e.total),
            "moment1": str(e.moment1),
            "moment2": str(e.moment2),
        }
    if args.mc_samples:
        mc = monte_carlo_moments(shape, v, args.mc_samples, args.seed)
        out["monte_carlo"] = {
            "mean_N": mc.mean_N, "stderr_N": mc.stderr_N,
            "mean_N2": mc.mean_N2, "stderr_N2": mc.stderr_N2,
            "samples": mc.samples, "seed": mc.seed,
        }
    lines = [f"E(N)   = {out['first']['decimal']}  ({out['first']['numerator']}/{out['first']['denominator']})"]
    if "second" in out:
        s = out["second"]
        lines.append(f"E(N^2) = {s['decimal']}  ({s['numerator']}/{s['denominator']})")
    if "enumeration" in out:
        e = out["enumeration"]
        lines.append(f"enumeration: E(N) = {e['moment1']}, E(N^2) = {e['moment2']}")
    if "monte_carlo" in out:
        m = out["monte_carlo"]
        lines.append(f"monte carlo: E(N) ~ {fmt(m['mean_N'])} +- {fmt(m['stderr_N'])}, "
                     f"E(N^2) ~ {fmt(m['mean_N2'])} +- {fmt(m['stderr_N2'])}")
    _emit(out, args.json, "\n".join(lines))
    return EXIT_OK


# --- parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="regksat", description="Threshold bounds for regular random k-SAT.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, json_flag=True):
        if json_flag:
            sp.add_argument("--json", action="store_true", help="machine-readable output")
        return sp

    b = common(sub.add_parser("bounds", help="first/second moment bounds per k"))
    b.add_argument("--k", "-k", type=_k_arg, nargs="+", required=True)
    b.add_argument("--variant", choices=["sat", "nae", "both"], default="both")
    b.add_argument("--deep", action="store_true", help=f"also search r* for k > {DEEP_K} (bisection)")
    b.add_argument("--assume-monotone", action="store_true", help="bisect r* and verify afterwards")
    b.set_defaults(func=cmd_bounds)

    def density(sp):
        sp.add_argument("--k", "-k", type=_k_arg, required=True)
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--r", type=int, help="literal degree (strictly regular)")
        g.add_argument("--alpha", type=_alpha_arg, help="clause density NUM/DEN")

    s = common(sub.add_parser("scan", help="overlap growth-rate scan"))
    density(s)
    s.add_argument("--variant", choices=["sat", "nae"], default="sat")
    s.add_argument("--resolution", type=float, default=None)
    s.add_argument("--out", help="CSV path (stdout when omitted)")
    s.set_defaults(func=cmd_scan)

    g = common(sub.add_parser("gen", help="write DIMACS instances"))
    density(g)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--simple-only", action="store_true", help="rejection-sample simple instances")
    g.set_defaults(func=cmd_gen)

    v = common(sub.add_parser("verify", help="oracle and identity self-checks"))
    v.add_argument("level", nargs="?", choices=["quick", "full"], default="quick")
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    m = common(sub.add_parser("moments", help="exact finite-n moments"))
    density(m)
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--variant", choices=["sat", "nae"], default="sat")
    m.add_argument("--second", action="store_true")
    m.add_argument("--enumerate", action="store_true")
    m.add_argument("--mc-samples", type=int, default=0)
    m.add_argument("--seed", type=int, default=0)
    m.set_defaults(func=cmd_moments)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Inconclusive as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except (UsageError, NonRealizable, TooLarge, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RegKSatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
