"""Saddle points of the overlap generating function.

For overlap fraction ``gamma`` the saddle ``t = (t1, t2, t3)`` solves
``a_f(t) = (k/2) * (1 - gamma, gamma, 1 - gamma)``.  Every positive solution
has ``t1 = t3``, so we work with ``u = (ln t1, ln t2)`` and minimize the
convex potential ``ln f(e^u1, e^u2, e^u1) - k(1-gamma) u1 - (k gamma / 2) u2``
by damped Newton with the closed-form Hessian.  The targets do not involve
the literal degree, so one solve per ``gamma`` serves every ``r`` and every
2-regular density.

At ``gamma = 0`` (resp. 1) the ``t2`` (resp. ``t1, t3``) slot vanishes and
a one-dimensional reduced problem is solved instead.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from ..ensemble import Variant
from ..errors import NoConvergence
from ..first_moment import solve_saddle_1d
from ..genfunc import entropy, overlap_polynomial

LN2 = math.log(2.0)
RESIDUAL_TOL = 1e-10
_NEWTON_TOL = 1e-13
_MAX_ITER = 200


@dataclass(frozen=True)
class SaddlePoint3D:
    t: tuple[float, float, float]
    gamma: float
    residual_norm: float
    B_at_t: np.ndarray = field(repr=False)
    variant: Variant
    k: int
    log_f: float


def _targets(k, gamma):
    gamma = np.asarray(gamma, dtype=float)
    return k * (1.0 - gamma) / 2.0, k * gamma / 2.0


def _state(poly, u1, u2):
    t = np.vstack([np.exp(u1), np.exp(u2), np.exp(u1)])
    with np.errstate(all="ignore"):
        return poly.full(t, strict=False)


def _newton_interior(k, variant, gamma, u1, u2, max_iter=_MAX_ITER):
    """Vectorized damped Newton on the reduced convex potential."""
    poly = overlap_polynomial(k, variant)
    c1, c2 = _targets(k, gamma)
    u1 = np.array(u1, dtype=float)
    u2 = np.array(u2, dtype=float)
    active = np.ones(u1.shape, dtype=bool)

    def potential(lead, den, v1, v2, cc1, cc2):
        return k * lead + den - 2.0 * cc1 * v1 - cc2 * v2

    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        v1, v2, cc1, cc2 = u1[idx], u2[idx], c1[idx], c2[idx]
        lead, den, a, B = _state(poly, v1, v2)
        phi = potential(lead, den, v1, v2, cc1, cc2)
        g1 = 2.0 * (a[0] - cc1)
        g2 = a[1] - cc2
        h11 = 2.0 * (B[0, 0] + B[0, 2])
        h12 = 2.0 * B[0, 1]
        h22 = B[1, 1]
        det = h11 * h22 - h12 * h12
        d1 = -(h22 * g1 - h12 * g2) / det
        d2 = -(h11 * g2 - h12 * g1) / det
        slope = g1 * d1 + g2 * d2
        res = np.maximum(np.abs(a[0] - cc1), np.abs(a[1] - cc2))
        done = res <= _NEWTON_TOL * max(1.0, k)
        step = np.ones(idx.size)
        pending = ~done
        for _ in range(50):
            if not pending.any():
                break
            n1 = v1 + step * d1
            n2 = v2 + step * d2
            tl, td, ta, _ = _state(poly, n1[pending], n2[pending])
            trial = potential(tl, td, n1[pending], n2[pending], cc1[pending], cc2[pending])
            tres = np.maximum(np.abs(ta[0] - cc1[pending]), np.abs(ta[1] - cc2[pending]))
            # near the root the potential is flat to roundoff; fall back to the residual
            ok = np.isfinite(trial) & (
                (trial <= phi[pending] + 1e-4 * step[pending] * slope[pending])
                | (tres < 0.5 * res[pending])
            )
            sub = np.flatnonzero(pending)
            step[sub[~ok]] *= 0.5
            pending[sub[ok]] = False
        # a failed line search means roundoff has been reached
        stalled = pending
        move = ~done & ~stalled
        u1[idx] = np.where(move, v1 + step * d1, v1)
        u2[idx] = np.where(move, v2 + step * d2, v2)
        active[idx[done | stalled]] = False
    return u1, u2


def _newton_endpoint(k, variant, which, u0):
    """One-dimensional reduced saddle at gamma = 0 (``which=0``) or gamma = 1."""
    poly = overlap_polynomial(k, variant)
    u = float(u0)

    def evaluate(v):
        x = math.exp(v)
        t = np.array([[x], [0.0], [x]]) if which == 0 else np.array([[0.0], [x], [0.0]])
        lead, den, a, B = poly.full(t)
        if which == 0:
            return k * lead[0] + den[0] - k * v, 2.0 * a[0, 0] - k, 2.0 * (B[0, 0, 0] + B[0, 2, 0])
        return k * lead[0] + den[0] - k * v / 2.0, a[1, 0] - k / 2.0, B[1, 1, 0]

    for _ in range(_MAX_ITER):
        phi, g, h = evaluate(u)
        if abs(g) <= _NEWTON_TOL * max(1.0, k):
            break
        d = -g / h
        step = 1.0
        for _ in range(60):
            try:
                trial = evaluate(u + step * d)[0]
            except Exception:
                trial = math.inf
            if math.isfinite(trial) and trial <= phi + 1e-4 * step * g * d + 4e-16 * abs(phi):
                break
            step *= 0.5
        u += step * d
    return u


@functools.lru_cache(maxsize=None)
def continuation_chain(k: int, variant: Variant):
    """Saddles along a path from gamma = 1/2 outward, for seeding other solves.

    Steps of 0.01 in gamma down to 0.01 / 0.99, then geometric steps toward
    the endpoints.  Returns ``(logit_gamma, u1, u2)`` sorted by gamma.
    """
    x = solve_saddle_1d(k, variant).x_k
    inner = 0.5 - 0.01 * np.arange(1, 50)
    tail = 10.0 ** -np.arange(2.125, 15.01, 0.125)
    lower = np.concatenate([inner, tail])
    out = {0.5: (math.log(x), 2.0 * math.log(x))}
    for side in (lower, 1.0 - lower):
        h1, h2 = out[0.5]
        for g in side:
            if g <= 0.0 or g >= 1.0:
                continue
            v1, v2 = _newton_interior(k, variant, np.array([g]), np.array([h1]), np.array([h2]))
            h1, h2 = float(v1[0]), float(v2[0])
            out[float(g)] = (h1, h2)
    gs = np.array(sorted(out))
    u1 = np.array([out[g][0] for g in gs])
    u2 = np.array([out[g][1] for g in gs])
    return _logit(gs), u1, u2


def _logit(g):
    g = np.asarray(g, dtype=float)
    return np.log(g) - np.log1p(-g)


def _interp_extrap(x, xp, fp):
    y = np.interp(x, xp, fp)
    lo = x < xp[0]
    hi = x > xp[-1]
    if lo.any():
        s = (fp[1] - fp[0]) / (xp[1] - xp[0])
        y[lo] = fp[0] + s * (x[lo] - xp[0])
    if hi.any():
        s = (fp[-1] - fp[-2]) / (xp[-1] - xp[-2])
        y[hi] = fp[-1] + s * (x[hi] - xp[-1])
    return y


def seed_from_chain(k, variant, gamma):
    lg, c1, c2 = continuation_chain(k, variant)
    z = _logit(gamma)
    return _interp_extrap(z, lg, c1), _interp_extrap(z, lg, c2)


@dataclass
class OverlapCurve:
    """Saddles and the degree-free parts of the overlap growth rate on a gamma grid.

    The strict growth rate is ``ln 2 + h(gamma) + r * slope``; ``u1``/``u2`` are
    ``-inf`` where the corresponding slot vanishes (endpoints).
    """

    k: int
    variant: Variant
    gamma: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    log_lead: np.ndarray
    log_den: np.ndarray
    residual: np.ndarray

    @property
    def entropy(self):
        return entropy(self.gamma)

    @property
    def slope(self):
        """Coefficient of the literal degree in the growth rate."""
        g = self.gamma
        with np.errstate(invalid="ignore"):
                lin = np.where(g < 1.0, (1.0 - g) * self.u1, 0.0) + np.where(g > 0.0, 0.5 * g * self.u2, 0.0)
        return 2.0 * (self.log_lead - LN2 - self.entropy - lin) + (2.0 / self.k) * self.log_den

    @property
    def t1(self):
        return np.exp(self.u1)

    @property
    def t2(self):
        return np.exp(self.u2)

    def growth_rate(self, r):
        return LN2 + self.entropy + r * self.slope


def solve_curve(k: int, variant, gamma, hint=None) -> OverlapCurve:
    """Solve the overlap saddle for every ``gamma`` in ``[0, 1]`` (vectorized)."""
    variant = Variant.parse(variant)
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    if np.any((gamma < 0) | (gamma > 1)):
        raise ValueError("overlap fractions must lie in [0, 1]")
    u1 = np.full(gamma.shape, -np.inf)
    u2 = np.full(gamma.shape, -np.inf)
    inner = (gamma > 0) & (gamma < 1)
    if inner.any():
        if hint is not None:
            s1 = np.broadcast_to(np.asarray(hint[0], dtype=float), gamma.shape)[inner]
            s2 = np.broadcast_to(np.asarray(hint[1], dtype=float), gamma.shape)[inner]
        else:
            s1, s2 = seed_from_chain(k, variant, gamma[inner])
        v1, v2 = _newton_interior(k, variant, gamma[inner], s1, s2)
        u1[inner], u2[inner] = v1, v2
    _, c1, c2 = continuation_chain(k, variant)
    if np.any(gamma == 0):
        u1[gamma == 0] = _newton_endpoint(k, variant, 0, c1[0])
    if np.any(gamma == 1):
        u2[gamma == 1] = _newton_endpoint(k, variant, 1, c2[-1])
    t = np.vstack([np.exp(u1), np.exp(u2), np.exp(u1)])
    lead, den, a, _ = overlap_polynomial(k, variant).full(t)
    c1t, c2t = _targets(k, gamma)
    residual = np.max(np.abs(a - np.vstack([c1t, c2t, c1t])), axis=0)
    bad = ~(residual <= RESIDUAL_TOL)
    if bad.any():
        worst = float(np.nanmax(np.where(np.isfinite(residual), residual, np.inf)))
        raise NoConvergence(
            f"overlap saddle failed for k={k}, {variant}, gamma={gamma[bad][:3]}", worst
        )
    return OverlapCurve(k, variant, gamma, u1, u2, lead, den, residual)


def solve_overlap_saddle(k: int, variant, gamma: float, hint=None) -> SaddlePoint3D:
    """Saddle ``t`` (with ``t1 = t3``) of the overlap generating function at ``gamma``.

    ``hint`` is an optional starting ``t``; without it the solve is seeded from
    the continuation path that starts at ``(x_k, x_k^2, x_k)``.
    """
    variant = Variant.parse(variant)
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie strictly between 0 and 1")
    h = None
    if hint is not None:
        h = (math.log(hint[0]), math.log(hint[1]))
    curve = solve_curve(k, variant, [gamma], hint=h)
    t1, t2 = float(curve.t1[0]), float(curve.t2[0])
    _, _, _, B = overlap_polynomial(k, variant).full(np.array([[t1], [t2], [t1]]))
    return SaddlePoint3D(
        t=(t1, t2, t1),
        gamma=float(gamma),
        residual_norm=float(curve.residual[0]),
        B_at_t=B[:, :, 0],
        variant=variant,
        k=k,
        log_f=float(k * curve.log_lead[0] + curve.log_den[0]),
    )


def center_C_f(k: int, variant) -> tuple[float, np.ndarray]:
    """``C_f = e B^{-1} e`` with ``e = (-1, 1, -1)`` at ``(x_k, x_k^2, x_k)``, and that B."""
    x = solve_saddle_1d(k, variant).x_k
    _, B = overlap_polynomial(k, Variant.parse(variant)).operators(np.array([[x], [x * x], [x]]))
    B = B[:, :, 0]
    e = np.array([-1.0, 1.0, -1.0])
    return float(e @ np.linalg.solve(B, e)), B
