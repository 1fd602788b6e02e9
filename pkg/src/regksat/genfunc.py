"""Clause generating functions and their logarithmic-derivative operators.

All of p, p_NAE, f and f_NAE are signed sums of k-th powers of affine forms
with 0/1 weights, e.g. ``f = (1+t1+t2+t3)^k - (1+t1)^k - (1+t3)^k + 1``.
:class:`PowerSum` evaluates such sums scaled by the dominant form
``(1 + sum t)^k``, which keeps every ratio finite for any k, and gives closed
form first and second partials.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .ensemble import Variant
from .errors import DegenerateF


@dataclass(frozen=True)
class PowerSum:
    """``sum_j coef[j] * (const[j] + weights[j] @ t) ** k``.

    Row 0 must be the form ``1 + sum(t)``, which dominates every other row for
    nonnegative ``t``.
    """

    k: int
    coef: np.ndarray
    const: np.ndarray
    weights: np.ndarray

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def _ratios(self, t):
        t = np.asarray(t, dtype=float).reshape(self.dim, -1)
        ell = self.const[:, None] + self.weights @ t
        lead = ell[0]
        return t, lead, ell / lead

    def _scaled(self, rho, power):
        # rho in [0, 1]; 0**0 never occurs because power >= 1 for k >= 3
        return rho**power

    def _den(self, t, lead, rho):
        """``F / lead^k`` without cancellation near t = 0.

        Rows with constant 1 contribute ``coef * (rho^k - 1)`` through expm1 on
        ``rho = 1 - delta``; their coefficients' sum is added back exactly.
        """
        k = self.k
        one = self.const == 1
        delta = ((1.0 - self.weights[one]) @ t) / lead
        with np.errstate(divide="ignore"):
            near = np.expm1(k * np.log1p(-delta))
        den = np.einsum("j,jn->n", self.coef[one], near) + self.coef[one].sum()
        if (~one).any():
            den = den + np.einsum("j,jn->n", self.coef[~one], self._scaled(rho[~one], k))
        return den

    def log_value(self, t):
        """Natural log of the sum; raises :class:`DegenerateF` if it is not positive."""
        t, lead, rho = self._ratios(t)
        den = self._den(t, lead, rho)
        if np.any(den <= 0.0):
            raise DegenerateF("generating function is not positive at the given point")
        return self.k * np.log(lead) + np.log(den)

    def value(self, t):
        t = np.asarray(t, dtype=float).reshape(self.dim, -1)
        ell = self.const[:, None] + self.weights @ t
        return np.einsum("j,jn->n", self.coef, ell**self.k)

    def operators(self, t):
        """Return ``(a, B)`` with ``a_i = t_i d ln F / d t_i`` and ``B_ij = t_j d a_i / d t_j``.

        Shapes are ``(d, N)`` and ``(d, d, N)`` for ``t`` of shape ``(d, N)``.
        """
        _, _, a, B = self.full(t)
        return a, B

    def full(self, t, strict=True):
        """``(ln lead, ln(F / lead^k), a, B)``; ``ln F`` is ``k * ln lead + second``.

        With ``strict=False`` points where the sum is not positive come back as
        NaN instead of raising.
        """
        t, lead, rho = self._ratios(t)
        k = self.k
        den = self._den(t, lead, rho)
        if np.any(den <= 0.0):
            if strict:
                raise DegenerateF("generating function is not positive at the given point")
            den = np.where(den > 0.0, den, np.nan)
        r1 = self._scaled(rho, k - 1)
        r2 = self._scaled(rho, k - 2)
        grad = k * np.einsum("j,ji,jn->in", self.coef, self.weights, r1)
        hess = k * (k - 1) * np.einsum("j,ji,jl,jn->iln", self.coef, self.weights, self.weights, r2)
        a = t * grad / (lead * den)
        tt = t[:, None, :] * t[None, :, :]
        B = tt * hess / (lead**2 * den) - a[:, None, :] * a[None, :, :]
        idx = np.arange(self.dim)
        B[idx, idx, :] += a
        B = 0.5 * (B + B.transpose(1, 0, 2))
        return np.log(lead), np.log(den), a, B


def _power_sum(k, rows):
    coef = np.array([c for c, _, _ in rows], dtype=float)
    const = np.array([b for _, b, _ in rows], dtype=float)
    weights = np.array([w for _, _, w in rows], dtype=float)
    return PowerSum(k=k, coef=coef, const=const, weights=weights)


@functools.lru_cache(maxsize=None)
def clause_polynomial(k: int, variant: Variant) -> PowerSum:
    """p(x) = (1+x)^k - 1, minus x^k for NAE."""
    variant = Variant.parse(variant)
    rows = [(1, 1, (1,)), (-1, 1, (0,))]
    if variant is Variant.NAE:
        rows.append((-1, 0, (1,)))
    return _power_sum(k, rows)


@functools.lru_cache(maxsize=None)
def overlap_polynomial(k: int, variant: Variant) -> PowerSum:
    """f(x1, x2, x3) counting edge-type placements in a clause satisfied by both assignments."""
    variant = Variant.parse(variant)
    rows = [
        (1, 1, (1, 1, 1)),
        (-1, 1, (1, 0, 0)),
        (-1, 1, (0, 0, 1)),
        (1, 1, (0, 0, 0)),
    ]
    if variant is Variant.NAE:
        rows += [
            (-1, 0, (1, 1, 0)),
            (1, 0, (1, 0, 0)),
            (-1, 0, (0, 1, 1)),
            (1, 0, (0, 1, 0)),
            (1, 0, (0, 0, 1)),
        ]
    return _power_sum(k, rows)


def eval_p(k: int, variant, x, log: bool = False):
    """p(x) (or ln p(x) when ``log``); scalar in, scalar out."""
    poly = clause_polynomial(k, Variant.parse(variant))
    out = poly.log_value(x) if log else poly.value(x)
    return _unwrap(out, x)


def eval_q(k: int, variant, x, log: bool = False):
    """q(x) = p(x) / x."""
    lp = eval_p(k, variant, x, log=True)
    lq = lp - np.log(x)
    return lq if log else np.exp(lq)


@dataclass(frozen=True)
class SaddleOperator1D:
    value_a: float
    value_b: float


def aq_bq_arrays(k: int, variant, x):
    """Vectorized ``(a_q, b_q)`` using ``a_q = x p'/p - 1`` and ``b_q = b_p``."""
    poly = clause_polynomial(k, Variant.parse(variant))
    a, B = poly.operators(np.asarray(x, dtype=float).reshape(1, -1))
    return a[0] - 1.0, B[0, 0]


def eval_aq_bq(k: int, variant, x: float) -> SaddleOperator1D:
    a, b = aq_bq_arrays(k, variant, x)
    return SaddleOperator1D(value_a=float(a[0]), value_b=float(b[0]))


def eval_f(k: int, variant, t, log: bool = False):
    poly = overlap_polynomial(k, Variant.parse(variant))
    t = np.asarray(t, dtype=float)
    out = poly.log_value(t.reshape(3, -1)) if log else poly.value(t.reshape(3, -1))
    return out[0] if t.ndim == 1 else out


@dataclass(frozen=True)
class SaddleOperator3D:
    vector_a: np.ndarray
    matrix_B: np.ndarray


def eval_af_Bf(k: int, variant, t) -> SaddleOperator3D:
    t = np.asarray(t, dtype=float).reshape(3)
    if np.any(t < 0):
        raise DegenerateF("overlap operators need nonnegative arguments")
    a, B = overlap_polynomial(k, Variant.parse(variant)).operators(t.reshape(3, 1))
    return SaddleOperator3D(vector_a=a[:, 0], matrix_B=B[:, :, 0])


def entropy(x):
    """Binary entropy in nats with h(0) = h(1) = 0."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("entropy argument must lie in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(x > 0, -x * np.log(np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, -(1 - x) * np.log1p(-np.where(x < 1, x, 0.0)), 0.0)
    out = a + b
    return float(out) if out.ndim == 0 else out


def _unwrap(out, x):
    return float(out[0]) if np.ndim(x) == 0 else out
