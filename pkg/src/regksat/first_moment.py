"""First-moment asymptotics and the resulting upper bounds on the thresholds.

The expected number of (NAE-)solutions behaves like
``prefactor * exp(n * rate(alpha))`` with ``rate(alpha) = ln 2 - alpha * D``
where ``D = -ln(p(x_k) / (2 sqrt(x_k))^k)`` and ``x_k`` solves
``a_q(x) = k/2 - 1``.  Writing the exponent through ``D`` avoids the
cancellation between ``k ln 2`` and ``ln q(x_k)`` that grows with k.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .ensemble import Variant
from .errors import BracketFailure
from .genfunc import aq_bq_arrays

LN2 = math.log(2.0)


@dataclass(frozen=True)
class SaddlePoint1D:
    x_k: float
    residual: float
    b_q_at_root: float
    variant: Variant
    k: int


@dataclass(frozen=True)
class FirstMomentAsymptotics:
    growth_rate: float
    prefactor: float
    variant: Variant
    k: int
    alpha: float


def _a_q(k, variant, x):
    return float(aq_bq_arrays(k, variant, x)[0][0])


@functools.lru_cache(maxsize=None)
def _solve_saddle_1d(k: int, variant: Variant) -> SaddlePoint1D:
    target = k / 2.0 - 1.0
    lo, hi = 1e-9, 1e9
    if not (_a_q(k, variant, lo) < target < _a_q(k, variant, hi)):
        raise BracketFailure(f"no sign change of a_q - {target} on [{lo}, {hi}]")
    # geometric halving first: the bracket spans 18 decades
    while hi / lo > 4.0:
        mid = math.sqrt(lo * hi)
        if _a_q(k, variant, mid) < target:
            lo = mid
        else:
            hi = mid
    while hi - lo > 1e-14 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _a_q(k, variant, mid) < target:
            lo = mid
        else:
            hi = mid
    x = lo if abs(_a_q(k, variant, lo) - target) <= abs(_a_q(k, variant, hi) - target) else hi
    a, b = aq_bq_arrays(k, variant, x)
    return SaddlePoint1D(
        x_k=x, residual=abs(float(a[0]) - target), b_q_at_root=float(b[0]), variant=variant, k=k
    )


def solve_saddle_1d(k: int, variant) -> SaddlePoint1D:
    """Positive root of ``a_q(x) = k/2 - 1`` by bisection (a_q is increasing)."""
    if int(k) != k or k < 3:
        raise ValueError(f"k must be an integer >= 3, got {k}")
    return _solve_saddle_1d(int(k), Variant.parse(variant))


def rate_deficit(k: int, variant, x: float) -> float:
    """``D(x) = -ln(p(x) / (2 sqrt x)^k)``; the rate at density alpha is ``ln 2 - alpha D``.

    Any ``x > 0`` gives ``D(x) <= D(x_k)``, hence an upper bound on the rate.
    """
    variant = Variant.parse(variant)
    v = math.log(x)
    # p(x)/(2 sqrt x)^k = cosh(v/2)^k - (2 sqrt x)^-k [- (sqrt x / 2)^k for NAE]
    log_cosh = abs(v) / 2 + math.log1p(math.exp(-abs(v))) - LN2
    head = math.expm1(k * log_cosh)
    tail = math.exp(-k * (LN2 + v / 2))
    if variant is Variant.NAE:
        tail += math.exp(k * (v / 2 - LN2))
    return -math.log1p(head - tail)


def growth_rate_first_moment(k: int, alpha: float, variant) -> FirstMomentAsymptotics:
    variant = Variant.parse(variant)
    sp = solve_saddle_1d(k, variant)
    rate = LN2 - float(alpha) * rate_deficit(k, variant, sp.x_k)
    return FirstMomentAsymptotics(
        growth_rate=rate,
        prefactor=math.sqrt(k / (4.0 * sp.b_q_at_root)),
        variant=variant,
        k=k,
        alpha=float(alpha),
    )


def growth_rate_bound_at(k: int, alpha: float, variant, x: float) -> float:
    """Exponent evaluated at an arbitrary ``x > 0``; never below the true rate."""
    return LN2 - float(alpha) * rate_deficit(k, variant, x)


def upper_bound_alpha(k: int, variant) -> float:
    """Zero of the (affine in alpha) first-moment exponent."""
    sp = solve_saddle_1d(k, variant)
    return LN2 / rate_deficit(k, variant, sp.x_k)


def upper_bound_alpha_at(k: int, variant, x: float) -> float:
    """Threshold bound obtained from the exponent at a fixed ``x``."""
    return LN2 / rate_deficit(k, variant, x)


def nae_upper_bound_closed_form(k: int) -> float:
    """``ln 2 / (k ln 2 - ln(2^k - 2))`` from ``x_{k,NAE} = 1``."""
    return LN2 / -math.log1p(-(2.0 ** (1 - k)))


@dataclass(frozen=True)
class LargeKBound:
    value: float
    without_correction: float
    correction_terms: float
    cap: float


def explicit_large_k_bound(k: int) -> LargeKBound:
    """Explicit large-k upper bound on the SAT threshold.

    ``value`` keeps the three small correction terms of the denominator,
    ``without_correction`` drops them; ``cap`` is ``2^k ln 2``.
    """
    if k < 3:
        raise ValueError("k must be >= 3")
    c = 1.0 - 2.0 ** (-(k + 1))
    cap = 2.0**k * LN2
    lead = 1.0 / c**k
    corr = k / 2.0 ** (k + 4) + 1.0 / (2.0 ** (k + 2) * c ** (2 * k)) - 1.0 / 2.0 ** (k + 1)
    return LargeKBound(
        value=cap / (lead + corr),
        without_correction=cap / lead,
        correction_terms=corr,
        cap=cap,
    )


def first_moment_rates(k: int, variant, alphas) -> np.ndarray:
    sp = solve_saddle_1d(k, variant)
    d = rate_deficit(k, variant, sp.x_k)
    return LN2 - np.asarray(alphas, dtype=float) * d
