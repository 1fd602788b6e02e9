import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from regksat.ensemble import Variant
from regksat.first_moment import (
    explicit_large_k_bound,
    first_moment_rates,
    growth_rate_bound_at,
    growth_rate_first_moment,
    nae_upper_bound_closed_form,
    solve_saddle_1d,
    upper_bound_alpha,
)
from regksat.genfunc import eval_aq_bq

LN2 = math.log(2)
GOLDEN = (math.sqrt(5) - 1) / 2


def test_saddle_nae_is_one():
    for k in range(3, 21):
        assert solve_saddle_1d(k, "nae").x_k == pytest.approx(1.0, abs=1e-12)


def test_saddle_k3_sat_golden_ratio():
    sp = solve_saddle_1d(3, "sat")
    assert sp.x_k == pytest.approx(GOLDEN, abs=1e-12)


def test_saddle_k4_sat_in_unit_interval():
    sp = solve_saddle_1d(4, "sat")
    assert 0 < sp.x_k < 1
    assert sp.residual <= 1e-12


def test_saddle_rejects_small_k():
    with pytest.raises(ValueError):
        solve_saddle_1d(2, "sat")


def test_rate_tends_to_ln2_without_clauses():
    assert growth_rate_first_moment(3, 1e-12, "sat").growth_rate == pytest.approx(LN2, abs=1e-10)


@pytest.mark.parametrize("k, alpha, v", [(3, 3.78222, "sat"), (3, 2.40942, "nae")])
def test_rate_zero_at_table_bound(k, alpha, v):
    assert abs(growth_rate_first_moment(k, alpha, v).growth_rate) < 1e-4


@pytest.mark.parametrize(
    "k, v, want, tol",
    [(3, "sat", 3.78222, 1e-3), (3, "nae", 2.40942, 1e-3), (4, "sat", 9.10776, 1e-3),
     (7, "sat", 85.8791, 1e-3), (10, "sat", 705.9533, 0.5), (17, "sat", 90845.9, 0.5)],
)
def test_upper_bound_alpha(k, v, want, tol):
    assert upper_bound_alpha(k, v) == pytest.approx(want, abs=tol)


def test_nae_closed_form_matches_root():
    for k in range(3, 15):
        assert upper_bound_alpha(k, "nae") == pytest.approx(nae_upper_bound_closed_form(k), rel=1e-12)
    assert nae_upper_bound_closed_form(3) == pytest.approx(LN2 / (3 * LN2 - math.log(6)), rel=1e-14)


@given(st.integers(3, 14), st.floats(0.05, 20.0), st.sampled_from(list(Variant)))
def test_any_x_bounds_the_rate_from_above(k, x, v):
    a = 1.7
    assert growth_rate_bound_at(k, a, v, x) >= growth_rate_first_moment(k, a, v).growth_rate - 1e-13


@given(st.integers(3, 12), st.sampled_from(list(Variant)))
def test_rate_is_affine_and_decreasing(k, v):
    r = first_moment_rates(k, v, [0.0, 1.0, 2.0])
    assert r[0] == pytest.approx(LN2)
    assert r[1] > r[2]
    assert r[0] - 2 * r[1] + r[2] == pytest.approx(0.0, abs=1e-12)


def test_prefactor_positive_and_uses_bq():
    fm = growth_rate_first_moment(3, 2.0, "sat")
    b = eval_aq_bq(3, "sat", GOLDEN).value_b
    assert fm.prefactor == pytest.approx(math.sqrt(3 / (4 * b)))


def test_explicit_large_k_bound():
    assert explicit_large_k_bound(8).value >= upper_bound_alpha(8, "sat")
    assert explicit_large_k_bound(3).value <= 8 * LN2
    b17 = explicit_large_k_bound(17)
    assert abs(b17.value / (2**17 * LN2) - 1) < 0.01
    with pytest.raises(ValueError):
        explicit_large_k_bound(2)


def test_large_k_ratio_and_nae_gap():
    for k in range(12, 18):
        ratio = upper_bound_alpha(k, "sat") / (2**k * LN2)
        assert 0.97 < ratio <= 1.0
    gaps = [upper_bound_alpha(k, "nae") - (2 ** (k - 1) * LN2 - LN2 / 2) for k in range(3, 21)]
    mags = [abs(g) for g in gaps]
    assert all(b < a for a, b in zip(mags, mags[1:]))
    assert mags[-1] < 1e-5
