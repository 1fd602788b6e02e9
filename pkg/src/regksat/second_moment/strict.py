"""Strictly regular second moment: s(gamma), dominance of gamma = 1/2, r*."""

from __future__ import annotations

import csv
import functools
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ..ensemble import Variant
from ..errors import Inconclusive, NoConvergence, NonPositiveVariance
from ..first_moment import solve_saddle_1d, upper_bound_alpha
from .overlap import LN2, OverlapCurve, center_C_f, solve_curve

MARGIN_TOL = 1e-9
EPS = 1e-4


def gamma_grid(resolution: float = 1e-3, eps: float = EPS) -> np.ndarray:
    """Uniform grid plus log-spaced points toward both endpoints and the endpoints."""
    if not 0 < resolution <= 0.25:
        raise ValueError("resolution must lie in (0, 0.25]")
    steps = int(round(1.0 / resolution))
    uniform = np.arange(1, steps) / steps
    ends = np.logspace(-14, math.log10(eps), 41)
    pts = np.concatenate([[0.0, 0.5, 1.0], uniform, ends, 1.0 - ends, [eps, 1.0 - eps]])
    pts = pts[(pts >= 0) & (pts <= 1)]
    return np.unique(pts)


@functools.lru_cache(maxsize=32)
def cached_curve(k: int, variant: Variant, resolution: float = 1e-3) -> OverlapCurve:
    return solve_curve(k, variant, gamma_grid(resolution))


def s_gamma(k: int, r: int, variant, gamma) -> float:
    """Growth rate of the overlap-gamma term of E(N^2) at literal degree r."""
    variant = Variant.parse(variant)
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    out = solve_curve(k, variant, g).growth_rate(r)
    return float(out[0]) if np.ndim(gamma) == 0 else out


def _derivative(k, r, gamma, u1, u2):
    return (1 - 2 * r) * (math.log1p(-gamma) - math.log(gamma)) + r * (2 * u1 - u2)


def stationarity_residual(k: int, r: int, variant, gamma: float, hint=None) -> float:
    """ds/dgamma at ``gamma``; saddle derivatives drop out by stationarity in t."""
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie strictly between 0 and 1")
    c = solve_curve(k, variant, [gamma], hint=hint)
    return _derivative(k, r, gamma, float(c.u1[0]), float(c.u2[0]))


@dataclass(frozen=True)
class LocalMax:
    gamma: float
    value: float


@dataclass
class OverlapScan:
    variant: Variant
    k: int
    r: int | None
    alpha: Fraction | None
    center_value: float
    max_off_center: float
    argmax_off_center: tuple
    margin: float
    dominant: bool
    inconclusive: bool
    inverse_variance: float
    endpoint_values: dict
    local_maxima: list = field(default_factory=list)
    columns: tuple = ()
    samples: np.ndarray = field(default=None, repr=False)

    def write_csv(self, sink) -> None:
        """Write the sampled curve/surface; ``sink`` is a path or a text stream."""
        if isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__"):
            with open(sink, "w", newline="") as fh:
                self.write_csv(fh)
            return
        w = csv.writer(sink)
        w.writerow(self.columns)
        for row in self.samples:
            w.writerow([f"{v:.17g}" for v in row])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "k": self.k,
            "variant": str(self.variant),
            "r": self.r,
            "alpha": None if self.alpha is None else str(self.alpha),
            "center_value": self.center_value,
            "max_off_center": self.max_off_center,
            "argmax_off_center": list(self.argmax_off_center),
            "margin": self.margin,
            "dominant": self.dominant,
            "inconclusive": self.inconclusive,
            "endpoint_values": self.endpoint_values,
        }


def inverse_sigma_s_sq(k: int, r: int, variant) -> float:
    """``1 / sigma_s^2 = 4 + (k r / 2) C_f - 8 r``; equals ``-s''(1/2)``."""
    C_f, _ = center_C_f(k, variant)
    return 4.0 + 0.5 * k * r * C_f - 8.0 * r


def sigma_s_sq(k: int, r: int, variant) -> float:
    """Normalized variance of the overlap around gamma = 1/2."""
    inv = inverse_sigma_s_sq(k, r, variant)
    if not inv > 0:
        raise NonPositiveVariance(1.0 / inv if inv != 0 else math.inf)
    return 1.0 / inv


@dataclass(frozen=True)
class ProbabilityBound:
    raw: float
    value: float
    clamped: bool


def clamp_probability(raw: float) -> ProbabilityBound:
    return ProbabilityBound(raw=raw, value=min(raw, 1.0), clamped=raw > 1.0)


def prob_lower_bound_strict(k: int, r: int, variant) -> ProbabilityBound:
    """Constant lower bound on lim P(N > 0) at literal degree r."""
    sp = solve_saddle_1d(k, variant)
    _, B = center_C_f(k, variant)
    sigma = math.sqrt(sigma_s_sq(k, r, variant))
    raw = 2.0 * math.sqrt(np.linalg.det(B)) / (sigma * sp.b_q_at_root * math.sqrt(k))
    return clamp_probability(raw)


def _refine(k, r, variant, curve, i, values):
    """Local max of s near grid index ``i`` (brackets its two grid neighbours)."""
    g = curve.gamma
    lo, hi = g[i - 1], g[i + 1]
    lo_e = lo if lo > 0 else 0.5 * g[i]
    hi_e = hi if hi < 1 else 1 - 0.5 * (1 - g[i])
    cache = {}

    def solve(x):
        if x not in cache:
            c = solve_curve(k, variant, [x], hint=(curve.u1[i], curve.u2[i]))
            cache[x] = (float(c.growth_rate(r)[0]), float(c.u1[0]), float(c.u2[0]))
        return cache[x]

    def ds(x):
        _, a, b = solve(x)
        return _derivative(k, r, x, a, b)

    best = LocalMax(float(g[i]), float(values[i]))
    tol = min(1e-6, 1e-3 * (hi_e - lo_e))
    try:
        if ds(lo_e) > 0 > ds(hi_e):
            x = brentq(ds, lo_e, hi_e, xtol=1e-3 * tol, rtol=1e-15)
        else:
            x = minimize_scalar(
                lambda y: -solve(y)[0], bounds=(lo_e, hi_e), method="bounded", options={"xatol": tol}
            ).x
        v = solve(float(x))[0]
        if v > best.value:
            best = LocalMax(float(x), v)
    except NoConvergence:
        # keep the grid value; a failed refinement cannot raise the verdict
        pass
    return best


def assess(curve: OverlapCurve, r: int, values=None, refine=True, center_excl=1e-6):
    """Dominance verdict from a solved curve at literal degree ``r``.

    Competitors of the center are both endpoints and every interior grid local
    max other than the center itself, each refined between its grid neighbours.
    """
    k, variant = curve.k, curve.variant
    s = curve.growth_rate(r) if values is None else values
    g = curve.gamma
    ic = int(np.argmin(np.abs(g - 0.5)))
    center = float(s[ic])
    best = max(LocalMax(0.0, float(s[0])), LocalMax(1.0, float(s[-1])), key=lambda m: m.value)
    maxima = []
    inner = np.arange(1, len(g) - 1)
    is_max = (s[inner] >= s[inner - 1]) & (s[inner] >= s[inner + 1]) & (inner != ic)
    for i in inner[is_max]:
        lm = _refine(k, r, variant, curve, i, s) if refine else LocalMax(float(g[i]), float(s[i]))
        if abs(lm.gamma - 0.5) <= center_excl:
            continue
        maxima.append(lm)
        if lm.value > best.value:
            best = lm
    inv_var = inverse_sigma_s_sq(k, r, variant)
    margin = center - best.value
    inconclusive = abs(margin) <= MARGIN_TOL
    return center, best, margin, inv_var, maxima, inconclusive


def dominance_scan_strict(k: int, r: int, variant, grid_resolution: float = 1e-3) -> OverlapScan:
    """Scan s over [0, 1] and decide whether gamma = 1/2 is the unique global max.

    An inconclusive margin (within 1e-9) is flagged on the returned scan rather
    than raised; :func:`find_r_star` turns it into :class:`Inconclusive`.
    """
    variant = Variant.parse(variant)
    curve = cached_curve(k, variant, float(grid_resolution))
    s = curve.growth_rate(r)
    center, best, margin, inv_var, maxima, inconclusive = assess(curve, r, s)
    samples = np.column_stack([curve.gamma, curve.t1, curve.t2, s, curve.residual])
    return OverlapScan(
        variant=variant,
        k=k,
        r=r,
        alpha=Fraction(2 * r, k),
        center_value=center,
        max_off_center=best.value,
        argmax_off_center=(best.gamma,),
        margin=margin,
        dominant=bool(margin > MARGIN_TOL and inv_var > 0),
        inconclusive=inconclusive,
        inverse_variance=inv_var,
        endpoint_values={"0": float(s[0]), "1": float(s[-1])},
        local_maxima=maxima,
        columns=("gamma", "t1", "t2", "s", "residual"),
        samples=samples,
    )


def grid_margins(curve: OverlapCurve, rs, chunk: int = 2048) -> np.ndarray:
    """Center value minus the best off-center grid value, for many r at once.

    A margin below zero proves dominance fails; a positive one is only necessary.
    """
    rs = np.asarray(rs, dtype=np.int64)
    g = curve.gamma
    ic = int(np.argmin(np.abs(g - 0.5)))
    h = curve.entropy
    c = curve.slope
    mask = np.ones(g.shape, dtype=bool)
    mask[ic] = False
    h_off, c_off = h[mask], c[mask]
    out = np.empty(rs.shape)
    for lo in range(0, rs.size, chunk):
        rr = rs[lo : lo + chunk, None].astype(float)
        best = np.max(h_off[None, :] + rr * c_off[None, :], axis=1)
        out[lo : lo + chunk] = h[ic] + rr[:, 0] * c[ic] - best
    return out


@dataclass
class SecondMomentReport:
    k: int
    variant: Variant
    r_star: int
    alpha_l: Fraction
    sigma_s_sq: float | None
    prob_lower_bound: ProbabilityBound | None
    C_f: float
    Sigma: np.ndarray | None = None
    A: float | None = None
    B: float | None = None
    C: float | None = None
    margin_at_r_star: float | None = None
    margin_above: float | None = None
    method: str = "linear"
    scans: int = 0

    def to_dict(self) -> dict:
        pb = self.prob_lower_bound
        return {
            "k": self.k,
            "variant": str(self.variant),
            "r_star": self.r_star,
            "alpha_l": float(self.alpha_l),
            "alpha_l_exact": str(self.alpha_l),
            "sigma_s_sq": self.sigma_s_sq,
            "prob_lower_bound": None if pb is None else pb.value,
            "prob_lower_bound_raw": None if pb is None else pb.raw,
            "C_f": self.C_f,
            "Sigma": None if self.Sigma is None else self.Sigma.tolist(),
            "margin_at_r_star": self.margin_at_r_star,
            "margin_above": self.margin_above,
            "method": self.method,
            "scans": self.scans,
        }


def r_upper_limit(k: int, variant) -> int:
    """Largest degree worth testing: beyond it the first moment already vanishes."""
    return math.ceil(k * upper_bound_alpha(k, variant) / 2)


def find_r_star(
    k: int, variant, assume_monotone: bool = False, grid_resolution: float = 1e-3
) -> SecondMomentReport:
    """Largest literal degree at which gamma = 1/2 dominates.

    The default search walks r upward from 1 and checks every r up to the
    first-moment limit; grid-level margins screen out degrees where dominance
    visibly fails, so only plausible ones get a refined scan.  With
    ``assume_monotone`` the verdict is bisected instead and then re-checked at
    r* and r*+1 (plus a grid screen of every degree above).
    """
    variant = Variant.parse(variant)
    curve = cached_curve(k, variant, float(grid_resolution))
    r_max = r_upper_limit(k, variant)
    scans = 0

    def verdict(r):
        nonlocal scans
        scans += 1
        center, best, margin, inv_var, _, inconclusive = assess(curve, r)
        if inconclusive:
            raise Inconclusive(f"dominance margin {margin:.3e} at r={r} is within tolerance", r=r)
        return margin > MARGIN_TOL and inv_var > 0, margin

    rs = np.arange(1, r_max + 1)
    coarse = grid_margins(curve, rs)
    if assume_monotone:
        lo, hi = 0, r_max + 1
        lo_margin = None
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if coarse[mid - 1] < -MARGIN_TOL:
                hi = mid
                continue
            ok, m = verdict(mid)
            if ok:
                lo, lo_margin = mid, m
            else:
                hi = mid
        r_star = lo
        if r_star >= 1:
            ok, margin_star = verdict(r_star)
            if not ok:
                raise Inconclusive(f"post-check failed: r={r_star} is not dominant", r=r_star)
            if np.any(coarse[: r_star] < -MARGIN_TOL):
                bad = int(np.flatnonzero(coarse[:r_star] < -MARGIN_TOL)[0]) + 1
                raise Inconclusive(f"monotonicity violated: dominance fails at r={bad} < r*", r=bad)
        else:
            margin_star = lo_margin
        method = "bisection"
    else:
        r_star, margin_star, failed = 0, None, False
        for r in rs:
            r = int(r)
            if coarse[r - 1] < -MARGIN_TOL:
                ok = False
            else:
                ok, m = verdict(r)
            if ok and failed:
                raise Inconclusive(f"non-monotone dominance: holds again at r={r}", r=r)
            if ok:
                r_star, margin_star = r, m
            elif not failed:
                failed = True
        method = "linear"
    margin_above = None
    if r_star + 1 <= r_max:
        ok, margin_above = verdict(r_star + 1)
        if ok:
            raise Inconclusive(f"dominance holds at r={r_star + 1} above the reported r*", r=r_star + 1)
    # every degree above r*+1 must fail visibly or on a refined scan
    if assume_monotone:
        for r in np.flatnonzero(coarse[r_star + 1 :] >= -MARGIN_TOL) + r_star + 2:
            if verdict(int(r))[0]:
                raise Inconclusive(f"non-monotone dominance: holds again at r={int(r)}", r=int(r))
    C_f, _ = center_C_f(k, variant)
    if r_star >= 1:
        sig = sigma_s_sq(k, r_star, variant)
        pb = prob_lower_bound_strict(k, r_star, variant)
    else:
        sig, pb = None, None
    return SecondMomentReport(
        k=k,
        variant=variant,
        r_star=r_star,
        alpha_l=Fraction(2 * r_star, k),
        sigma_s_sq=sig,
        prob_lower_bound=pb,
        C_f=C_f,
        margin_at_r_star=margin_star,
        margin_above=margin_above,
        method=method,
        scans=scans,
    )


def center_curvature(k: int, r: int, variant, h: float = 1e-3) -> float:
    """Second difference of s at 1/2; an oracle independent of the closed form for sigma_s^2."""
    g = np.array([0.5 - h, 0.5, 0.5 + h])
    s = solve_curve(k, variant, g).growth_rate(r)
    return float((s[0] - 2 * s[1] + s[2]) / (h * h))

