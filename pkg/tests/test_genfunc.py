import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from regksat.ensemble import Variant
from regksat.errors import DegenerateF
from regksat.genfunc import (
    aq_bq_arrays,
    clause_polynomial,
    entropy,
    eval_af_Bf,
    eval_aq_bq,
    eval_f,
    eval_p,
    eval_q,
    overlap_polynomial,
)

variants = st.sampled_from(list(Variant))
pos = st.floats(min_value=0.05, max_value=20.0)


def brute_overlap(k, variant, t):
    """Sum over all 4^k edge-type sequences of a clause satisfied under both assignments.

    Type 1: true under the first only; 2: true under both; 3: under the second
    only; 4: under neither.
    """
    total = 0.0
    w = {1: t[0], 2: t[1], 3: t[2], 4: 1.0}
    for seq in itertools.product((1, 2, 3, 4), repeat=k):
        first = [s in (1, 2) for s in seq]
        second = [s in (2, 3) for s in seq]
        if variant is Variant.SAT:
            ok = any(first) and any(second)
        else:
            ok = any(first) and not all(first) and any(second) and not all(second)
        if ok:
            total += math.prod(w[s] for s in seq)
    return total


def test_p_values():
    assert eval_p(3, "sat", 1.0) == 7
    assert eval_p(3, "nae", 1.0) == 6
    assert eval_p(10, "sat", 0.5) == pytest.approx(1.5**10 - 1, rel=1e-14)


def test_f_at_ones():
    assert eval_f(3, "sat", [1, 1, 1]) == pytest.approx(49)


@pytest.mark.parametrize("k", [3, 4, 5])
@pytest.mark.parametrize("variant", list(Variant))
def test_overlap_polynomial_counts_edge_types(k, variant):
    rng = np.random.default_rng(k)
    for _ in range(3):
        t = rng.uniform(0.2, 2.0, size=3)
        assert eval_f(k, variant, t) == pytest.approx(brute_overlap(k, variant, t), rel=1e-12)


@given(k=st.integers(3, 30), x=pos, v=variants)
def test_diagonal_collapse(k, x, v):
    lhs = eval_f(k, v, np.array([x, x * x, x]), log=True)
    assert lhs == pytest.approx(2 * eval_p(k, v, x, log=True), rel=1e-12, abs=1e-12)


@given(k=st.integers(3, 15), a=pos, b=pos, c=pos, v=variants)
def test_f_symmetric(k, a, b, c, v):
    assert eval_f(k, v, [a, b, c], log=True) == pytest.approx(eval_f(k, v, [c, b, a], log=True), rel=1e-13)


def test_log_domain_large_k():
    # (1 + 3x)^k overflows float64 for k = 400, x = 10; the log path does not
    lf = eval_f(400, "sat", [10.0, 10.0, 10.0], log=True)
    assert lf == pytest.approx(400 * math.log(31.0), rel=1e-12)
    assert eval_p(400, "nae", 10.0, log=True) == pytest.approx(400 * math.log(11.0), rel=1e-12)


def test_q_at_zero_limit():
    assert eval_q(3, "sat", 1e-12) == pytest.approx(3, rel=1e-9)
    assert eval_q(3, "nae", 1e-12) == pytest.approx(3, rel=1e-9)


@pytest.mark.parametrize("k", range(3, 21))
def test_nae_aq_at_one(k):
    assert eval_aq_bq(k, "nae", 1.0).value_a == pytest.approx(k / 2 - 1, abs=1e-12)


def test_aq_golden_ratio():
    x = (math.sqrt(5) - 1) / 2
    assert eval_aq_bq(3, "sat", x).value_a == pytest.approx(0.5, abs=1e-14)


def test_aq_limits():
    assert eval_aq_bq(3, "sat", 1e-9).value_a == pytest.approx(0, abs=1e-8)
    assert eval_aq_bq(3, "sat", 1e9).value_a == pytest.approx(2, abs=1e-8)


@given(k=st.integers(3, 25), x=pos, v=variants)
def test_bq_is_log_derivative_of_aq(k, x, v):
    h = 1e-5
    ap = eval_aq_bq(k, v, x * math.exp(h)).value_a
    am = eval_aq_bq(k, v, x * math.exp(-h)).value_a
    b = eval_aq_bq(k, v, x).value_b
    assert b > 0
    assert (ap - am) / (2 * h) == pytest.approx(b, rel=1e-6)


def test_aq_monotone_on_grid():
    xs = np.logspace(-6, 6, 400)
    for v in Variant:
        a, b = aq_bq_arrays(7, v, xs)
        assert np.all(np.diff(a) > 0) and np.all(b > 0)


@given(k=st.integers(3, 12), v=variants, t=st.tuples(pos, pos, pos))
def test_af_Bf_against_finite_differences(k, v, t):
    t = np.array(t)
    op = eval_af_Bf(k, v, t)
    assert np.allclose(op.matrix_B, op.matrix_B.T, atol=0)
    h = 1e-5
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        fd = (eval_f(k, v, t * np.exp(e), log=True) - eval_f(k, v, t * np.exp(-e), log=True)) / (2 * h)
        assert fd == pytest.approx(op.vector_a[i], rel=1e-6, abs=1e-9)
        col = (eval_af_Bf(k, v, t * np.exp(e)).vector_a - eval_af_Bf(k, v, t * np.exp(-e)).vector_a) / (2 * h)
        assert col == pytest.approx(op.matrix_B[:, i], rel=1e-6, abs=1e-8)


def test_af_center_pattern_k3():
    x = (math.sqrt(5) - 1) / 2
    op = eval_af_Bf(3, "sat", [x, x * x, x])
    assert op.vector_a == pytest.approx([0.75, 0.75, 0.75], abs=1e-12)
    assert np.all(np.linalg.eigvalsh(op.matrix_B) > 0)


def test_af_rejects_negative():
    with pytest.raises(DegenerateF):
        eval_af_Bf(3, "sat", [-1.0, 1.0, 1.0])


def test_entropy_values():
    assert entropy(0.5) == pytest.approx(math.log(2))
    assert entropy(0.0) == 0.0 and entropy(1.0) == 0.0
    assert entropy(0.25) == pytest.approx(0.562335, abs=1e-6)
    with pytest.raises(ValueError):
        entropy(1.5)


@given(x=st.floats(0, 1))
def test_entropy_symmetric(x):
    assert entropy(x) == pytest.approx(entropy(1 - x), abs=1e-15)


def test_polynomial_rows_cached():
    assert clause_polynomial(5, Variant.SAT) is clause_polynomial(5, Variant.SAT)
    assert overlap_polynomial(5, Variant.NAE).coef.size == 9
