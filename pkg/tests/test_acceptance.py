"""One test per acceptance criterion; each records a PASS/FAIL line for the terminal summary."""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from regksat.cli import fmt
from regksat.ensemble import Variant, make_profile
from regksat.first_moment import upper_bound_alpha
from regksat.second_moment import (
    dominance_scan_2reg,
    find_r_star,
    lower_bound_alpha_2reg,
    prob_lower_bound_strict,
    sigma_matrix_2reg,
)
from regksat.verify import (
    TABLE_ALPHA_U,
    TABLE_R_STAR,
    check_alpha_u,
    check_center_rate,
    check_diagonal_identity,
    check_enumeration,
    check_generator_coupling,
    check_hayman,
    check_nae_saddle,
    check_operator_derivatives,
    check_sigma_curvature,
)

LN2 = math.log(2)


def record(n, ok, detail):
    ACCEPTANCE_LINES.append(f"CRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


def within_last_digit(value, printed: str) -> bool:
    decimals = len(printed.split(".")[1]) if "." in printed else 0
    return abs(value - float(printed)) <= 10.0**-decimals * (1 + 1e-9)


def test_criterion_1_upper_bounds():
    worst = 0.0
    for v in TABLE_ALPHA_U:
        for k in TABLE_ALPHA_U[v]:
            t0 = time.perf_counter()
            upper_bound_alpha(k, v)
            worst = max(worst, time.perf_counter() - t0)
    c = check_alpha_u()
    devs = ", ".join(f"{i['variant']} k={i['k']}: {i['computed']:.6f}" for i in c.items)
    record(1, c.passed and worst < 1.0, f"alpha_u within tolerance ({devs}); slowest {worst:.3f}s")


def test_criterion_2_r_star_table():
    rows, ok = [], True
    t0 = time.perf_counter()
    for v in Variant:
        for k in (3, 4, 7, 10):
            rep = find_r_star(k, v, assume_monotone=k >= 10)
            want = TABLE_R_STAR[v][k]
            good = rep.r_star == want and rep.alpha_l == Fraction(2 * want, k)
            ok &= good
            rows.append(f"{v} k={k}: {rep.r_star} ({'ok' if good else f'table {want}'})")
    record(2, ok, f"r* {'; '.join(rows)} [{time.perf_counter() - t0:.1f}s]")


@pytest.mark.slow
def test_criterion_3_deep_rows():
    table = {
        (Variant.SAT, 15): (170298, "22706.4", "22707.5"),
        (Variant.SAT, 17): (772182, "90844.94", "90845.9"),
        (Variant.NAE, 15): (85167, "11355.6", "11356.2"),
        (Variant.NAE, 17): (386114, "45425.2", "45425.7"),
    }
    rows, ok = [], True
    for (v, k), (r_want, al, au) in table.items():
        t0 = time.perf_counter()
        rep = find_r_star(k, v, assume_monotone=True)
        a_u = upper_bound_alpha(k, v)
        good = rep.r_star == r_want and within_last_digit(float(rep.alpha_l), al) and within_last_digit(a_u, au)
        ok &= good
        rows.append(f"{v} k={k}: r*={rep.r_star} {fmt(float(rep.alpha_l))}/{fmt(a_u)} {time.perf_counter() - t0:.1f}s")
    record(3, ok, "; ".join(rows))


def test_criterion_4_large_k():
    ratios = [upper_bound_alpha(k, "sat") / (2**k * LN2) for k in range(12, 18)]
    gaps = [abs(upper_bound_alpha(k, "nae") - (2 ** (k - 1) * LN2 - LN2 / 2)) for k in range(3, 21)]
    ok_ratio = all(0.97 < r <= 1.0 for r in ratios)
    ok_gap = all(b < a for a, b in zip(gaps, gaps[1:])) and gaps[-1] < 1e-5
    record(4, ok_ratio and ok_gap,
           f"ratios {min(ratios):.5f}..{max(ratios):.5f}; NAE |gap| {gaps[0]:.3g} -> {gaps[-1]:.3g} decreasing")


def test_criterion_5_oracle_exactness():
    t0 = time.perf_counter()
    c = check_enumeration(10)
    dt = time.perf_counter() - t0
    record(5, c.passed and dt < 60, f"{c.detail}; {dt:.1f}s")


def test_criterion_6_generator_coupling():
    t0 = time.perf_counter()
    c = check_generator_coupling(100_000, seed=0)
    dt = time.perf_counter() - t0
    record(6, c.passed and dt < 120, f"{c.detail}; {dt:.1f}s")


def test_criterion_7_hayman():
    c = check_hayman(240)
    ratios = ", ".join(f"{i['variant']} k={i['k']} r={i['r']}: {i['ratio']:.4f}" for i in c.items)
    record(7, c.passed, f"exact/asymptotic at n=240: {ratios}")


def test_criterion_8_identities():
    checks = [
        check_diagonal_identity(1000, seed=0),
        check_center_rate(range(3, 11)),
        check_nae_saddle(range(3, 51)),
        check_operator_derivatives(50, seed=1),
    ]
    record(8, all(c.passed for c in checks), "; ".join(f"{c.name}: {c.detail}" for c in checks))


def _two_regular_points():
    brackets = {
        (3, "sat"): (Fraction(2), Fraction(29, 10)),
        (3, "nae"): (Fraction(2, 3), Fraction(17, 10)),
        (4, "sat"): (Fraction(15, 2), Fraction(8)),
        (4, "nae"): (Fraction(7, 2), Fraction(42, 10)),
    }
    for (k, v), (lo, hi) in brackets.items():
        for j in range(1, 6):
            a = lo + (hi - lo) * Fraction(2 * j - 1, 10)
            if make_profile(k, a).strictly_regular:
                a += Fraction(1, 97)
            yield k, v, a


def test_criterion_9_second_moment_consistency():
    c = check_sigma_curvature()
    pd_ok, n_pts, probs = True, 0, []
    for k, v, a in _two_regular_points():
        if not dominance_scan_2reg(k, a, v).dominant:
            continue
        rep = sigma_matrix_2reg(k, a, v)
        S = rep.Sigma
        pd_ok &= bool(np.allclose(S, S.T) and np.all(np.linalg.eigvalsh(S) > 0))
        probs.append(rep.prob_lower_bound.value)
        n_pts += 1
    for k, r, v in [(3, 4, "sat"), (4, 16, "sat"), (4, 8, "nae"), (7, 296, "sat"), (7, 152, "nae")]:
        probs.append(prob_lower_bound_strict(k, r, v).value)
    prob_ok = all(p > 0 for p in probs)
    ok = c.passed and pd_ok and n_pts >= 20 and prob_ok
    record(9, ok, f"{c.detail}; Sigma SPD at {n_pts} dominant 2-regular points; "
                  f"min probability bound {min(probs):.3g}")


@pytest.mark.slow
def test_criterion_10_two_regular_bracket():
    rows, ok = [], True
    for k, v, strict in [(3, "sat", 8 / 3), (3, "nae", 2.0), (4, "sat", 8.0), (4, "nae", 4.0)]:
        val = lower_bound_alpha_2reg(k, v)
        good = abs(val - strict) <= 2 / k
        ok &= good
        rows.append(f"{v} k={k}: {val:.4f} vs {strict:.4f}")
    record(10, ok, "; ".join(rows))
