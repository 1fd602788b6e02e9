"""Degree profiles and finite shapes of the regular random k-SAT ensemble.

Every literal has degree ``r`` or ``r + 1`` and a literal shares its degree
with its negation, so a profile is fully described by ``(k, alpha)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real

from .errors import NonRealizable


class Variant(enum.Enum):
    SAT = "sat"
    NAE = "nae"

    @classmethod
    def parse(cls, value: "Variant | str") -> "Variant":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown variant {value!r}; expected 'sat' or 'nae'") from None

    def __str__(self) -> str:
        return self.value


def as_fraction(alpha: Real | str) -> Fraction:
    """Exact rational for a density given as int, Fraction, 'NUM/DEN' or decimal.

    Floats are read through their shortest repr, so ``2.7`` becomes ``27/10``.
    """
    if isinstance(alpha, Rational):
        return Fraction(alpha)
    if isinstance(alpha, str):
        return Fraction(alpha.strip())
    if isinstance(alpha, float):
        if not math.isfinite(alpha):
            raise ValueError(f"density must be finite, got {alpha}")
        return Fraction(repr(alpha))
    return Fraction(alpha)


@dataclass(frozen=True)
class DegreeProfile:
    k: int
    alpha_exact: Fraction
    r_floor: int
    lambda_r: float
    lambda_r1: float
    strictly_regular: bool

    @property
    def alpha(self) -> float:
        return float(self.alpha_exact)

    @property
    def half_degree_sum(self) -> Fraction:
        """k*alpha/2, the mean literal degree."""
        return self.k * self.alpha_exact / 2

    def reconstructed_alpha(self) -> float:
        r = self.r_floor
        return 2.0 * (r * self.lambda_r + (r + 1) * self.lambda_r1) / self.k


def make_profile(k: int, alpha: Real | str) -> DegreeProfile:
    if int(k) != k or k < 3:
        raise ValueError(f"clause width must be an integer >= 3, got {k}")
    k = int(k)
    a = as_fraction(alpha)
    if a <= 0:
        raise ValueError(f"density must be positive, got {alpha}")
    half = k * a / 2
    r = math.floor(half)
    lam_r1 = half - r
    lam_r = 1 - lam_r1
    return DegreeProfile(
        k=k,
        alpha_exact=a,
        r_floor=r,
        lambda_r=float(lam_r),
        lambda_r1=float(lam_r1),
        strictly_regular=lam_r1 == 0,
    )


def regular_profile(k: int, r: int) -> DegreeProfile:
    """Strictly regular profile with literal degree ``r`` (alpha = 2r/k)."""
    if int(r) != r or r < 1:
        raise ValueError(f"literal degree must be a positive integer, got {r}")
    return make_profile(k, Fraction(2 * int(r), int(k)))


@dataclass(frozen=True)
class FiniteInstanceShape:
    profile: DegreeProfile
    n: int
    m: int
    n_r: int
    n_r1: int
    edge_count: int

    @property
    def k(self) -> int:
        return self.profile.k

    @property
    def r(self) -> int:
        return self.profile.r_floor

    @property
    def true_edges(self) -> int:
        """Edges on true literals under any assignment: k*alpha*n/2."""
        return self.edge_count // 2

    def degrees(self) -> tuple[int, ...]:
        """Per-variable degrees; the last ``n_r1`` variables carry ``r + 1``."""
        return (self.r,) * self.n_r + (self.r + 1,) * self.n_r1


def make_shape(profile: DegreeProfile, n: int) -> FiniteInstanceShape:
    if int(n) != n or n < 1:
        raise NonRealizable(f"variable count must be a positive integer, got {n}")
    n = int(n)
    m = profile.alpha_exact * n
    if m.denominator != 1:
        raise NonRealizable(f"alpha*n = {m} is not an integer")
    m = int(m)
    edges = profile.k * m
    if edges % 2:
        raise NonRealizable(f"k*alpha*n = {edges} is odd")
    half = edges // 2
    r = profile.r_floor
    n_r1 = half - r * n
    n_r = n - n_r1
    if n_r < 0 or n_r1 < 0:
        raise NonRealizable(f"degree counts n_r={n_r}, n_r1={n_r1} not realizable")
    return FiniteInstanceShape(profile=profile, n=n, m=m, n_r=n_r, n_r1=n_r1, edge_count=edges)
