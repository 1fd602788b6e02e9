import io
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from regksat.ensemble import Variant
from regksat.errors import NonPositiveVariance
from regksat.first_moment import growth_rate_first_moment
from regksat.genfunc import eval_af_Bf
from scipy.special import gammaln
from regksat.second_moment import (
    dominance_scan_strict,
    find_r_star,
    prob_lower_bound_strict,
    s_gamma,
    sigma_s_sq,
    solve_curve,
    solve_overlap_saddle,
    stationarity_residual,
)
from regksat.second_moment.strict import center_curvature, gamma_grid, grid_margins, r_upper_limit

GOLDEN = (math.sqrt(5) - 1) / 2


def twice_rate(k, r, v):
    return 2 * growth_rate_first_moment(k, Fraction(2 * r, k), v).growth_rate


class TestSaddle:
    def test_center_sat_k3(self):
        sp = solve_overlap_saddle(3, "sat", 0.5)
        np.testing.assert_allclose(sp.t, (GOLDEN, GOLDEN**2, GOLDEN), rtol=1e-10)

    def test_center_nae_k3(self):
        sp = solve_overlap_saddle(3, "nae", 0.5)
        np.testing.assert_allclose(sp.t, (1, 1, 1), rtol=1e-10)

    @given(st.integers(3, 12), st.floats(0.01, 0.99), st.sampled_from(list(Variant)))
    def test_off_center_plugs_back(self, k, g, v):
        sp = solve_overlap_saddle(k, v, g)
        assert sp.residual_norm <= 1e-10
        a = eval_af_Bf(k, v, np.array(sp.t)).vector_a
        np.testing.assert_allclose(a, [k * (1 - g) / 2, k * g / 2, k * (1 - g) / 2], atol=1e-9)

    def test_curve_is_vectorized_and_matches_pointwise(self):
        gs = np.array([0.1, 0.3, 0.5, 0.8])
        c = solve_curve(4, "sat", gs)
        for i, g in enumerate(gs):
            sp = solve_overlap_saddle(4, "sat", g)
            assert c.t1[i] == pytest.approx(sp.t[0], rel=1e-9)


class TestGrowthRate:
    @pytest.mark.parametrize("k", range(3, 11))
    @pytest.mark.parametrize("v", list(Variant))
    def test_center_twice_first_moment(self, k, v):
        for r in (1, 2, 5):
            assert s_gamma(k, r, v, 0.5) == pytest.approx(twice_rate(k, r, v), abs=1e-10)

    @given(st.integers(3, 9), st.integers(1, 40), st.floats(0.02, 0.48))
    def test_nae_complement_symmetry(self, k, r, g):
        assert s_gamma(k, r, "nae", g) == pytest.approx(s_gamma(k, r, "nae", 1 - g), abs=1e-8)

    def test_sat_is_not_complement_symmetric(self):
        # SAT pairs (sigma, tau) and (sigma, not tau) are not equivalent
        assert abs(s_gamma(3, 4, "sat", 0.3) - s_gamma(3, 4, "sat", 0.7)) > 1e-3

    @pytest.mark.parametrize("k, r", [(3, 4), (4, 16), (7, 296)])
    def test_full_overlap_equals_first_moment(self, k, r):
        for v in Variant:
            assert s_gamma(k, r, v, 1.0) == pytest.approx(twice_rate(k, r, v) / 2, abs=1e-10)

    @pytest.mark.parametrize("k, r", [(3, 4), (7, 296)])
    def test_zero_overlap_sat_limit(self, k, r):
        alpha = 2 * r / k
        want = math.log(2) + alpha * math.log1p(-(2.0 ** (1 - k)))
        assert s_gamma(k, r, "sat", 0.0) == pytest.approx(want, abs=1e-9)
        assert s_gamma(k, r, "sat", 1e-9) == pytest.approx(want, abs=1e-6)

    def test_k3_r5_off_center_max(self):
        gs = np.linspace(0.01, 0.99, 99)
        vals = np.array([s_gamma(3, 5, "sat", g) for g in gs])
        assert vals.max() > s_gamma(3, 5, "sat", 0.5)


class TestStationarity:
    def test_zero_at_center(self):
        assert stationarity_residual(3, 4, "sat", 0.5) == pytest.approx(0.0, abs=1e-10)

    @given(st.integers(3, 8), st.integers(1, 20), st.floats(0.05, 0.95), st.sampled_from(list(Variant)))
    def test_matches_finite_difference(self, k, r, g, v):
        h = 1e-5
        fd = (s_gamma(k, r, v, g + h) - s_gamma(k, r, v, g - h)) / (2 * h)
        assert stationarity_residual(k, r, v, g) == pytest.approx(fd, abs=1e-5)

    def test_sign_change_at_center(self):
        lo = stationarity_residual(3, 4, "sat", 0.5 - 1e-3)
        hi = stationarity_residual(3, 4, "sat", 0.5 + 1e-3)
        assert lo > 0 > hi


class TestDominance:
    @pytest.mark.parametrize("k, r, v, want", [
        (3, 4, "sat", True), (3, 5, "sat", False),
        (4, 16, "sat", True), (4, 17, "sat", False),
        (4, 8, "nae", True), (4, 9, "nae", False),
    ])
    def test_verdicts(self, k, r, v, want):
        scan = dominance_scan_strict(k, r, v)
        assert scan.dominant is want
        assert not scan.inconclusive
        assert (scan.margin > 0) is want

    def test_resolution_robust(self):
        for r in (4, 5):
            a = dominance_scan_strict(3, r, "sat", 1e-2)
            b = dominance_scan_strict(3, r, "sat", 1e-3)
            assert a.dominant == b.dominant
            assert a.margin == pytest.approx(b.margin, abs=1e-9)

    def test_csv_rows(self):
        scan = dominance_scan_strict(3, 4, "sat", 1e-2)
        buf = io.StringIO()
        scan.write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0].split(",")[0] == scan.columns[0]
        assert len(lines) == 1 + len(scan.samples)
        assert scan.columns[0] == "gamma"
        best = scan.samples[np.argmax(scan.samples[:, scan.columns.index("s")])]
        assert best[0] == pytest.approx(0.5)

    def test_grid_screen_agrees_with_refined_scans(self):
        curve = solve_curve(4, "sat", gamma_grid(1e-3))
        m = grid_margins(curve, [15, 16, 17, 18])
        assert m[0] > 0 and m[1] > 0
        assert m[3] < 0

    def test_grid_contains_endpoints_and_center(self):
        g = gamma_grid(1e-2)
        assert g[0] == 0.0 and g[-1] == 1.0 and 0.5 in g
        assert np.all(np.diff(g) > 0)


class TestWidth:
    @pytest.mark.parametrize("k, r, v", [(3, 4, "sat"), (4, 16, "sat"), (4, 8, "nae"), (7, 296, "sat")])
    def test_sigma_matches_curvature(self, k, r, v):
        sig = sigma_s_sq(k, r, v)
        assert sig > 0
        assert -1 / center_curvature(k, r, v, h=1e-3) == pytest.approx(sig, rel=1e-4)

    def test_k3_r8_beyond_upper_bound(self):
        try:
            sigma_s_sq(3, 8, "sat")
        except NonPositiveVariance:
            return
        assert not dominance_scan_strict(3, 8, "sat").dominant

    def test_k3_r3_nae_center_is_a_minimum(self):
        # at this degree the center is not a local maximum, so there is no Gaussian width
        with pytest.raises(NonPositiveVariance):
            sigma_s_sq(3, 3, "nae")
        assert not dominance_scan_strict(3, 3, "nae").dominant

    def test_probability_matches_local_limit_sum(self):
        # sum every overlap term of E(N^2) by its own 3-D local limit approximation at large n
        k, r, n = 3, 4, 30_000
        T, m = r * n, 2 * r * n // k
        i = np.arange(1, n)
        c = solve_curve(k, "sat", i / n)
        a, b = T - r * i, r * i
        logdet = np.array([
            np.linalg.slogdet(m * eval_af_Bf(k, "sat", np.exp([x, y, x])).matrix_B)[1] for x, y in zip(c.u1, c.u2)
        ])
        terms = (
            n * math.log(2) + gammaln(n + 1) - gammaln(i + 1) - gammaln(n - i + 1)
            + 2 * gammaln(a + 1) + 2 * gammaln(b + 1) - gammaln(2 * T + 1)
            + m * (k * c.log_lead + c.log_den) - 2 * a * c.u1 - b * c.u2
            - 1.5 * math.log(2 * math.pi) - 0.5 * logdet
        )
        top = terms.max()
        log_e2 = top + math.log(np.exp(terms - top).sum())
        fm = growth_rate_first_moment(k, Fraction(2 * r, k), "sat")
        ratio = math.exp(2 * (math.log(fm.prefactor) + n * fm.growth_rate) - log_e2)
        assert ratio == pytest.approx(prob_lower_bound_strict(k, r, "sat").raw, rel=2e-3)

    @pytest.mark.parametrize("k, r, v", [(3, 4, "sat"), (3, 2, "nae"), (4, 16, "sat"), (7, 296, "sat")])
    def test_probability_in_unit_interval(self, k, r, v):
        pb = prob_lower_bound_strict(k, r, v)
        assert 0 < pb.value <= 1
        assert pb.clamped == (pb.raw > 1)


class TestRStar:
    @pytest.mark.parametrize("k, v, want", [(3, "sat", 4), (4, "sat", 16), (4, "nae", 8)])
    def test_small_k(self, k, v, want):
        rep = find_r_star(k, v)
        assert rep.r_star == want
        assert rep.alpha_l == Fraction(2 * want, k)
        assert rep.margin_at_r_star > 0 and rep.margin_above < 0

    def test_k3_nae_computed_value(self):
        # the dominance test fails at r = 3 (see README); the largest dominant degree is 2
        assert find_r_star(3, "nae").r_star == 2

    def test_bisection_agrees_with_linear(self):
        for v in Variant:
            assert find_r_star(4, v, assume_monotone=True).r_star == find_r_star(4, v).r_star

    def test_report_serializes(self):
        d = find_r_star(3, "sat").to_dict()
        assert d["alpha_l_exact"] == "8/3"
        assert d["sigma_s_sq"] > 0

    def test_upper_limit_covers_r_star(self):
        assert r_upper_limit(3, "sat") >= 5
