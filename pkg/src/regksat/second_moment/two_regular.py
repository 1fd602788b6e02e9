"""Second moment for 2-regular profiles (literal degrees r and r + 1).

With ``Gamma = r L_r g_r + (r+1) L_r1 g_r1`` the overlap saddle only sees the
effective fraction ``g_eff = 2 Gamma / (k alpha)``, so

    g(g_r, g_r1) = ln 2 + L_r h(g_r) + L_r1 h(g_r1) + (k alpha / 2) c(g_eff)

where ``c`` is the degree-free slope of the strictly regular curve.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize

from ..ensemble import DegreeProfile, Variant, as_fraction, make_profile
from ..errors import Inconclusive, NoConvergence, SingularSigma
from ..first_moment import solve_saddle_1d, upper_bound_alpha
from ..genfunc import entropy
from .overlap import LN2, center_C_f, solve_curve
from .strict import (
    MARGIN_TOL,
    LocalMax,
    OverlapScan,
    SecondMomentReport,
    clamp_probability,
    dominance_scan_strict,
    find_r_star,
)


def _require_2reg(prof: DegreeProfile):
    if prof.strictly_regular:
        raise ValueError(
            f"alpha = {prof.alpha_exact} is strictly regular (degree {prof.r_floor}); "
            "the 2-regular width matrix degenerates, use sigma_s_sq and prob_lower_bound_strict"
        )


def effective_gamma(prof: DegreeProfile, gamma_r, gamma_r1):
    r = prof.r_floor
    half = float(prof.half_degree_sum)
    G = r * prof.lambda_r * np.asarray(gamma_r, float) + (r + 1) * prof.lambda_r1 * np.asarray(gamma_r1, float)
    return np.clip(G / half, 0.0, 1.0)


def _g_from(prof, gamma_r, gamma_r1, curve):
    half = float(prof.half_degree_sum)
    return (
        LN2
        + prof.lambda_r * entropy(gamma_r)
        + prof.lambda_r1 * entropy(gamma_r1)
        + half * curve.slope
    )


def g_gamma_2reg(k: int, alpha, variant, gamma_r, gamma_r1):
    """Growth rate of the (gamma_r, gamma_r1) overlap term of E(N^2)."""
    prof = make_profile(k, alpha)
    variant = Variant.parse(variant)
    gr = np.atleast_1d(np.asarray(gamma_r, float))
    gr1 = np.atleast_1d(np.asarray(gamma_r1, float))
    gr, gr1 = np.broadcast_arrays(gr, gr1)
    curve = solve_curve(k, variant, effective_gamma(prof, gr, gr1).ravel())
    out = _g_from(prof, gr.ravel(), gr1.ravel(), curve).reshape(gr.shape)
    return float(out.ravel()[0]) if np.ndim(gamma_r) == 0 and np.ndim(gamma_r1) == 0 else out


def _logit_gap(g):
    return math.log1p(-g) - math.log(g)


def stationarity_2reg(k: int, alpha, variant, gamma_r: float, gamma_r1: float) -> np.ndarray:
    """Gradient of g; both components vanish at a stationary overlap pair."""
    prof = make_profile(k, alpha)
    r = prof.r_floor
    ge = float(effective_gamma(prof, gamma_r, gamma_r1))
    c = solve_curve(k, variant, [ge])
    slope_d = 2 * float(c.u1[0]) - float(c.u2[0]) - 2 * _logit_gap(ge)
    return np.array(
        [
            prof.lambda_r * (_logit_gap(gamma_r) + r * slope_d),
            prof.lambda_r1 * (_logit_gap(gamma_r1) + (r + 1) * slope_d),
        ]
    )


def grid_axis(resolution: float = 1 / 200) -> np.ndarray:
    steps = int(round(1.0 / resolution))
    ends = np.logspace(-12, -3, 10)
    return np.unique(np.concatenate([np.arange(steps + 1) / steps, ends, 1 - ends]))


def _grid_local_maxima(G, ic, jc):
    """Indices of points at least as high as every existing 8-neighbour."""
    P = np.pad(G, 1, constant_values=-np.inf)
    core = P[1:-1, 1:-1]
    ok = np.ones(G.shape, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                ok &= core >= P[1 + di : P.shape[0] - 1 + di, 1 + dj : P.shape[1] - 1 + dj]
    ok[ic, jc] = False
    return np.argwhere(ok)


def _refine_2d(k, variant, prof, x0):
    lo = 1e-15

    def fun(x):
        val = g_gamma_2reg(k, prof.alpha_exact, variant, x[0], x[1])
        grad = stationarity_2reg(k, prof.alpha_exact, variant, x[0], x[1])
        return -val, -grad

    x0 = np.clip(np.asarray(x0, float), lo, 1 - lo)
    res = minimize(fun, x0, jac=True, method="L-BFGS-B", bounds=[(lo, 1 - lo)] * 2,
                   options={"ftol": 1e-15, "gtol": 1e-10})
    return LocalMax((float(res.x[0]), float(res.x[1])), float(-res.fun))


def dominance_scan_2reg(k: int, alpha, variant, grid_resolution: float = 1 / 200) -> OverlapScan:
    """2-D scan of g over [0,1]^2 with local refinement of every grid maximum.

    A strictly regular ``alpha`` is handed to the one-dimensional strict scan,
    since one of the two axes then carries no weight.
    """
    variant = Variant.parse(variant)
    prof = make_profile(k, alpha)
    if prof.strictly_regular:
        return dominance_scan_strict(k, prof.r_floor, variant)
    ax = grid_axis(grid_resolution)
    GR, GR1 = np.meshgrid(ax, ax, indexing="ij")
    geff = effective_gamma(prof, GR, GR1).ravel()
    curve = solve_curve(k, variant, geff)
    G = _g_from(prof, GR.ravel(), GR1.ravel(), curve).reshape(GR.shape)
    ic = jc = int(np.argmin(np.abs(ax - 0.5)))
    center = float(G[ic, jc])
    corners = [((0.0, 0.0), G[0, 0]), ((1.0, 1.0), G[-1, -1]), ((0.0, 1.0), G[0, -1]), ((1.0, 0.0), G[-1, 0])]
    best = max((LocalMax(p, float(v)) for p, v in corners), key=lambda m: m.value)
    maxima = []
    for i, j in _grid_local_maxima(G, ic, jc):
        try:
            lm = _refine_2d(k, variant, prof, (ax[i], ax[j]))
        except NoConvergence:
            lm = LocalMax((float(ax[i]), float(ax[j])), float(G[i, j]))
        if lm.value < G[i, j]:
            lm = LocalMax((float(ax[i]), float(ax[j])), float(G[i, j]))
        if max(abs(lm.gamma[0] - 0.5), abs(lm.gamma[1] - 0.5)) <= 1e-6:
            continue
        maxima.append(lm)
        if lm.value > best.value:
            best = lm
    Sinv = sigma_inverse_entries(k, prof, variant)
    pd = Sinv[0] > 0 and Sinv[0] * Sinv[1] - Sinv[2] ** 2 > 0
    margin = center - best.value
    samples = np.column_stack(
        [GR.ravel(), GR1.ravel(), curve.t1, curve.t2, G.ravel(), curve.residual]
    )
    return OverlapScan(
        variant=variant,
        k=k,
        r=prof.r_floor,
        alpha=prof.alpha_exact,
        center_value=center,
        max_off_center=best.value,
        argmax_off_center=tuple(best.gamma),
        margin=margin,
        dominant=bool(margin > MARGIN_TOL and pd),
        inconclusive=abs(margin) <= MARGIN_TOL,
        inverse_variance=float(Sinv[0] * Sinv[1] - Sinv[2] ** 2),
        endpoint_values={f"{p[0]:g},{p[1]:g}": float(v) for p, v in corners},
        local_maxima=maxima,
        columns=("gamma_r", "gamma_r1", "t1", "t2", "g", "residual"),
        samples=samples,
    )


def sigma_inverse_entries(k: int, prof: DegreeProfile, variant):
    """``(A, B, C)`` of the Gaussian width matrix ``[[A, C], [C, B]]``.

    It is minus the Hessian of g in the coordinates ``(L_r g_r, L_r1 g_r1)``
    at the center; with ``L_r1 = 0`` the A entry reduces to ``1 / sigma_s^2``.
    """
    C_f, _ = center_C_f(k, variant)
    r = prof.r_floor
    a = prof.alpha
    w = 0.5 * C_f - 8.0 / k
    with np.errstate(divide="ignore"):
        A = 4.0 / prof.lambda_r + 2 * r * r / a * w if prof.lambda_r > 0 else math.inf
        B = 4.0 / prof.lambda_r1 + 2 * (r + 1) ** 2 / a * w if prof.lambda_r1 > 0 else math.inf
    C = 2 * r * (r + 1) / a * w
    return A, B, C


def sigma_matrix_2reg(k: int, alpha, variant) -> SecondMomentReport:
    """Width matrix and the resulting probability lower bound at a 2-regular density."""
    variant = Variant.parse(variant)
    prof = make_profile(k, alpha)
    _require_2reg(prof)
    A, B, C = sigma_inverse_entries(k, prof, variant)
    Sigma = np.array([[A, C], [C, B]])
    det = float(np.linalg.det(Sigma))
    if not det > 1e-12 * max(abs(A), abs(B)) ** 2:
        raise SingularSigma(f"width matrix is singular or indefinite (det={det:.3e})")
    sp = solve_saddle_1d(k, variant)
    C_f, Bf = center_C_f(k, variant)
    raw = math.sqrt(np.linalg.det(Bf) * prof.lambda_r * prof.lambda_r1) / (
        sp.b_q_at_root * math.sqrt(k * det)
    )
    return SecondMomentReport(
        k=k,
        variant=variant,
        r_star=prof.r_floor,
        alpha_l=prof.alpha_exact,
        sigma_s_sq=None,
        prob_lower_bound=clamp_probability(raw),
        C_f=C_f,
        Sigma=Sigma,
        A=A,
        B=B,
        C=C,
        method="2-regular",
    )


def lower_bound_alpha_2reg(k: int, variant, alpha_tolerance: float = 1e-3, grid_resolution: float = 1 / 200):
    """Largest density (to ``alpha_tolerance``) at which the 2-D center dominates.

    Bisects between ``2(r*-1)/k`` and the first-moment bound; assumes the
    verdict is monotone in alpha.
    """
    variant = Variant.parse(variant)
    rep = find_r_star(k, variant)
    lo = Fraction(2 * max(rep.r_star - 1, 1), k)
    hi = as_fraction(upper_bound_alpha(k, variant))

    def dominant(a):
        scan = dominance_scan_2reg(k, a, variant, grid_resolution)
        if scan.inconclusive:
            raise Inconclusive(f"margin {scan.margin:.3e} at alpha={float(a)} within tolerance", scan=scan)
        return scan.dominant

    if not dominant(lo):
        raise Inconclusive(f"no dominance at the lower bracket alpha={float(lo)}")
    tol = Fraction(alpha_tolerance).limit_denominator(10**9)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if dominant(mid):
            lo = mid
        else:
            hi = mid
    return float(lo)
