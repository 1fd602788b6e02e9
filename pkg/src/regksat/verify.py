"""Self-checks behind ``regksat verify``: oracle cross-checks and identity suites."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .ensemble import Variant, make_profile, make_shape, regular_profile
from .errors import NonRealizable
from .exact_oracle import (
    enumerate_tiny,
    exact_first_moment,
    exact_second_moment_2reg,
    exact_second_moment_strict,
)
from .first_moment import growth_rate_first_moment, upper_bound_alpha
from .formula_gen import count_assignments, generate
from .genfunc import aq_bq_arrays, eval_af_Bf, eval_f, eval_p
from .second_moment import find_r_star, s_gamma, sigma_s_sq
from .second_moment.strict import center_curvature

TABLE_ALPHA_U = {
    Variant.SAT: {3: 3.78222, 4: 9.10776, 7: 85.8791, 10: 705.9533},
    Variant.NAE: {3: 2.40942, 4: 5.19089, 7: 44.0139, 10: 354.545},
}
TABLE_R_STAR = {
    Variant.SAT: {3: 4, 4: 16, 7: 296, 10: 3524, 15: 170298, 17: 772182},
    Variant.NAE: {3: 3, 4: 8, 7: 152, 10: 1770, 15: 85167, 17: 386114},
}


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0
    items: list = field(default_factory=list)

    def to_dict(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
            "seconds": round(self.seconds, 3),
            "items": self.items,
        }


def tiny_shapes(max_edges: int = 10, ks=(3, 4, 5)):
    """Every realizable shape with at most ``max_edges`` edges and literal degree >= 1."""
    seen = set()
    out = []
    for k in ks:
        for edges in range(2 * k, max_edges + 1, 2):
            if edges % k:
                continue
            m = edges // k
            T = edges // 2
            for n in range(1, T + 1):
                alpha = Fraction(m, n)
                prof = make_profile(k, alpha)
                if prof.r_floor < 1:
                    continue
                try:
                    sh = make_shape(prof, n)
                except NonRealizable:
                    continue
                key = (k, alpha, n)
                if key not in seen:
                    seen.add(key)
                    out.append(sh)
    return out


def check_enumeration(max_edges: int = 10) -> Check:
    items, ok = [], True
    for sh in tiny_shapes(max_edges):
        for v in Variant:
            e = enumerate_tiny(sh, v)
            f1 = exact_first_moment(sh, v).value
            if sh.n_r1 and sh.n_r:
                f2 = exact_second_moment_2reg(sh, v).value
            else:
                f2 = exact_second_moment_strict(sh, v).value
            good = e.moment1 == f1 and e.moment2 == f2
            ok &= good
            items.append(
                {"k": sh.k, "n": sh.n, "alpha": str(sh.profile.alpha_exact), "variant": str(v),
                 "E1": str(f1), "E2": str(f2), "match": good}
            )
    base = make_shape(regular_profile(3, 3), 1)
    e1 = exact_first_moment(base, Variant.SAT).value
    ok &= e1 == Fraction(9, 5)
    return Check("enumeration_equals_formula", ok, f"{len(items)} cases; E(N)(k=3,n=1,r=3) = {e1}", items=items)


def check_diagonal_identity(points: int = 1000, seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(points):
        k = int(rng.integers(3, 18))
        x = float(np.exp(rng.uniform(-3, 3)))
        for v in Variant:
            lhs = eval_f(k, v, np.array([x, x * x, x]), log=True)
            rhs = 2 * eval_p(k, v, x, log=True)
            worst = max(worst, abs(math.expm1(lhs - rhs)))
    return Check("diagonal_identity", worst <= 1e-12, f"max relative error {worst:.2e}")


def check_center_rate(ks=range(3, 11)) -> Check:
    worst, items = 0.0, []
    for k in ks:
        for v in Variant:
            rs = {1, 2, max(1, TABLE_R_STAR[v].get(k, 3))}
            for r in sorted(rs):
                s = s_gamma(k, r, v, 0.5)
                two = 2 * growth_rate_first_moment(k, Fraction(2 * r, k), v).growth_rate
                worst = max(worst, abs(s - two))
                items.append({"k": k, "r": r, "variant": str(v), "s_half": s, "twice_rate": two})
    return Check("center_is_twice_first_moment", worst <= 1e-10, f"max deviation {worst:.2e}", items=items)


def check_nae_saddle(ks=range(3, 51)) -> Check:
    worst = 0.0
    for k in ks:
        a, _ = aq_bq_arrays(k, Variant.NAE, 1.0)
        worst = max(worst, abs(float(a[0]) - (k / 2 - 1)))
    return Check("nae_saddle_at_one", worst <= 1e-12, f"max |a_q(1) - (k/2 - 1)| = {worst:.2e}")


def check_operator_derivatives(points: int = 50, seed: int = 1) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    h = 1e-5
    for _ in range(points):
        k = int(rng.integers(3, 12))
        v = Variant.SAT if rng.random() < 0.5 else Variant.NAE
        t = np.exp(rng.uniform(-1.5, 1.5, size=3))
        op = eval_af_Bf(k, v, t)
        lf = lambda y: eval_f(k, v, y, log=True)  # noqa: E731
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            # a_i = d ln f / d ln t_i
            fd = (lf(t * np.exp(e)) - lf(t * np.exp(-e))) / (2 * h)
            worst = max(worst, abs(fd - op.vector_a[i]) / max(abs(op.vector_a[i]), 1e-300))
            ap = eval_af_Bf(k, v, t * np.exp(e)).vector_a
            am = eval_af_Bf(k, v, t * np.exp(-e)).vector_a
            col = (ap - am) / (2 * h)
            worst = max(worst, float(np.max(np.abs(col - op.matrix_B[:, i]) / np.maximum(np.abs(op.matrix_B[:, i]), 1e-3))))
    return Check("operator_finite_differences", worst <= 1e-6, f"max relative error {worst:.2e}")


def check_alpha_u() -> Check:
    items, ok = [], True
    for v, table in TABLE_ALPHA_U.items():
        for k, want in table.items():
            got = upper_bound_alpha(k, v)
            tol = 0.5 if k >= 10 else 1e-3
            good = abs(got - want) <= tol
            ok &= good
            items.append({"k": k, "variant": str(v), "computed": got, "table": want, "match": good})
    return Check("table_alpha_u", ok, "first-moment upper bounds", items=items)


def check_generator_coupling(samples: int = 100_000, seed: int = 0) -> Check:
    sh = make_shape(regular_profile(3, 3), 4)
    xs = np.fromiter(
        (count_assignments(generate(sh, seed + i), Variant.SAT) for i in range(samples)), float, samples
    )
    exact = float(exact_first_moment(sh, Variant.SAT).value)
    se = xs.std(ddof=1) / math.sqrt(samples)
    z = (xs.mean() - exact) / se
    return Check("generator_measure_coupling", abs(z) <= 4, f"mean {xs.mean():.5f} vs exact {exact:.5f} (z={z:+.2f})")


def check_r_star(ks=(3, 4, 7, 10)) -> Check:
    items, ok = [], True
    for v in Variant:
        for k in ks:
            got = find_r_star(k, v, assume_monotone=True).r_star
            want = TABLE_R_STAR[v][k]
            good = got == want
            ok &= good
            items.append({"k": k, "variant": str(v), "computed": got, "table": want, "match": good})
    return Check("table_r_star", ok, "largest dominant literal degree", items=items)


def check_sigma_curvature() -> Check:
    worst, items = 0.0, []
    for k, v, r in [(3, Variant.SAT, 4), (4, Variant.SAT, 16), (4, Variant.NAE, 8), (7, Variant.SAT, 296)]:
        sig = sigma_s_sq(k, r, v)
        curv = center_curvature(k, r, v)
        rel = abs(-1.0 / curv - sig) / sig
        worst = max(worst, rel)
        items.append({"k": k, "r": r, "variant": str(v), "sigma_s_sq": sig, "from_curvature": -1.0 / curv})
    return Check("sigma_matches_curvature", worst <= 1e-4, f"max relative deviation {worst:.2e}", items=items)


def check_hayman(n: int = 240) -> Check:
    items, ok = [], True
    for k, r, v in [(3, 4, Variant.SAT), (3, 4, Variant.NAE), (4, 3, Variant.SAT)]:
        sh = make_shape(regular_profile(k, r), n)
        fm = growth_rate_first_moment(k, sh.profile.alpha_exact, v)
        ratio = math.exp(exact_first_moment(sh, v).log() - n * fm.growth_rate) / fm.prefactor
        good = 0.9 <= ratio <= 1.1
        ok &= good
        items.append({"k": k, "r": r, "n": n, "variant": str(v), "ratio": ratio})
    return Check("hayman_prefactor", ok, "exact / asymptotic first moment", items=items)


QUICK = [
    ("enumeration_equals_formula", lambda seed: check_enumeration(8)),
    ("diagonal_identity", lambda seed: check_diagonal_identity(seed=seed)),
    ("center_is_twice_first_moment", lambda seed: check_center_rate()),
    ("nae_saddle_at_one", lambda seed: check_nae_saddle()),
    ("operator_finite_differences", lambda seed: check_operator_derivatives(seed=seed + 1)),
    ("table_alpha_u", lambda seed: check_alpha_u()),
]
FULL = QUICK[1:] + [
    ("enumeration_equals_formula", lambda seed: check_enumeration(10)),
    ("hayman_prefactor", lambda seed: check_hayman()),
    ("sigma_matches_curvature", lambda seed: check_sigma_curvature()),
    ("generator_measure_coupling", lambda seed: check_generator_coupling(seed=seed)),
    ("table_r_star", lambda seed: check_r_star()),
]


def run(level: str = "quick", seed: int = 0) -> list[Check]:
    suite = QUICK if level == "quick" else FULL
    out = []
    for name, fn in suite:
        t0 = time.perf_counter()
        try:
            c = fn(seed)
        except Exception as exc:  # a crash is a failed check, not a crashed report
            c = Check(name, False, f"{type(exc).__name__}: {exc}")
        c.seconds = time.perf_counter() - t0
        out.append(c)
    return out
