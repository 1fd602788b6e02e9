"""Exact finite-n moments of the solution count, plus brute-force and Monte Carlo oracles.

Everything here is exact integer/rational arithmetic except
:func:`monte_carlo_moments`.  By symmetry one assignment (all false) is fixed;
it makes ``T = k alpha n / 2`` literal edges true, and a formula is a uniform
matching of the ``2T`` literal edges to the clause slots.
"""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .ensemble import DegreeProfile, FiniteInstanceShape, Variant
from .errors import TooLarge

DEFAULT_MAX_EDGES = 2000
# trivariate work grows like T^3 k^3 m; keep desk-scale by default
DEFAULT_MAX_TRIVARIATE_EDGES = 160
ENUM_MAX_EDGES = 10


class Which(enum.Enum):
    FIRST = "first"
    SECOND = "second"


@dataclass(frozen=True)
class ExactMoment:
    value: Fraction
    n: int
    k: int
    profile: DegreeProfile
    variant: Variant
    which: Which

    def __float__(self) -> float:
        return float(self.value)

    def log(self) -> float:
        """Natural log of the value without going through a float overflow."""
        v = self.value
        return _log_int(v.numerator) - _log_int(v.denominator)

    def to_dict(self) -> dict:
        return {
            "which": self.which.value,
            "variant": str(self.variant),
            "k": self.k,
            "n": self.n,
            "alpha": str(self.profile.alpha_exact),
            "numerator": str(self.value.numerator),
            "denominator": str(self.value.denominator),
            "decimal": _decimal(self.value, 12),
        }


def _log_int(x: int) -> float:
    b = x.bit_length()
    if b < 1000:
        return math.log(x)
    shift = b - 60
    return math.log(x >> shift) + shift * math.log(2.0)


def _decimal(q: Fraction, digits: int) -> str:
    if q == 0:
        return "0"
    e = math.floor(math.log10(q.numerator) - math.log10(q.denominator)) if q > 0 else 0
    scale = digits - 1 - e
    if scale >= 0:
        m = round(q * 10**scale)
    else:
        m = round(q / 10 ** (-scale))
    s = str(m)
    if len(s) > digits:  # rounding carried into a new digit
        e += 1
        s = s[:digits]
    mant = s[0] + ("." + s[1:] if len(s) > 1 else "")
    return f"{mant}e{e:+d}"


@lru_cache(maxsize=None)
def clause_coefficients(k: int, variant: Variant) -> tuple[int, ...]:
    """Coefficients of p(x): number of true-slot patterns with j true slots."""
    c = [math.comb(k, j) for j in range(k + 1)]
    c[0] = 0
    if Variant.parse(variant) is Variant.NAE:
        c[k] = 0
    return tuple(c)


def _kronecker_mul(a: int, b: int, mask: int) -> int:
    return (a * b) & mask


def power_coef_uni(k: int, variant, power: int, target_exp: int) -> int:
    """Exact coefficient of x^target_exp in p(x)^power.

    Coefficients are packed into one big integer (Kronecker substitution) with
    slots wide enough that no carry ever crosses a slot; products are
    truncated above the target degree.
    """
    if power < 0 or target_exp < 0:
        raise ValueError("power and target exponent must be nonnegative")
    if power == 0:
        return int(target_exp == 0)
    coeffs = clause_coefficients(k, Variant.parse(variant))
    if target_exp > k * power:
        return 0
    width = k * power + 2  # every coefficient of p^j (j <= power) is below 2^(k*power)
    keep = target_exp + 1
    mask = (1 << (width * keep)) - 1
    base = 0
    for j, c in enumerate(coeffs[:keep]):
        base |= c << (width * j)
    result = 1
    e = power
    while e:
        if e & 1:
            result = _kronecker_mul(result, base, mask)
        e >>= 1
        if e:
            base = _kronecker_mul(base, base, mask)
    return (result >> (width * target_exp)) & ((1 << width) - 1)


def power_coef_uni_binomial(k: int, variant, power: int, target_exp: int) -> int:
    """Same coefficient by inclusion-exclusion over clauses (SAT only formula).

    coef = sum_j (-1)^(power-j) C(power, j) C(k j, target); the NAE variant is
    expanded trinomially.  Independent of the convolution path.
    """
    variant = Variant.parse(variant)
    m, t = power, target_exp
    total = 0
    if variant is Variant.SAT:
        for j in range(m + 1):
            total += (-1) ** (m - j) * math.comb(m, j) * math.comb(k * j, t)
        return total
    # ((1+x)^k - 1 - x^k)^m = sum_{a+b+c=m} m!/(a!b!c!) (1+x)^{ka} (-1)^b (-x^k)^c
    for a in range(m + 1):
        for c in range(m - a + 1):
            b = m - a - c
            rest = t - k * c
            if rest < 0:
                continue
            mult = math.comb(m, a) * math.comb(m - a, c)
            total += (-1) ** (b + c) * mult * math.comb(k * a, rest)
    return total


@lru_cache(maxsize=None)
def overlap_coefficients(k: int, variant: Variant) -> dict:
    """Coefficient map (a, b, c) -> count of f (types 1, 2, 3; type 4 implicit)."""
    variant = Variant.parse(variant)
    rows = [
        (1, True, (1, 1, 1)),
        (-1, True, (1, 0, 0)),
        (-1, True, (0, 0, 1)),
        (1, True, (0, 0, 0)),
    ]
    if variant is Variant.NAE:
        rows += [
            (-1, False, (1, 1, 0)),
            (1, False, (1, 0, 0)),
            (-1, False, (0, 1, 1)),
            (1, False, (0, 1, 0)),
            (1, False, (0, 0, 1)),
        ]
    out: dict = defaultdict(int)
    for sign, has_one, w in rows:
        # (has_one + w . x)^k by the multinomial theorem
        for a in range(k + 1):
            for b in range(k + 1 - a):
                for c in range(k + 1 - a - b):
                    d = k - a - b - c
                    if (a and not w[0]) or (b and not w[1]) or (c and not w[2]) or (d and not has_one):
                        continue
                    out[(a, b, c)] += sign * math.factorial(k) // (
                        math.factorial(a) * math.factorial(b) * math.factorial(c) * math.factorial(d)
                    )
    return {key: v for key, v in out.items() if v}


def trivariate_power(k: int, variant, power: int, cap: int) -> dict:
    """Coefficients of f^power restricted to ``a + b <= cap`` and ``b + c <= cap``.

    Both constraints only grow under multiplication, so pruning is exact.
    """
    terms = list(overlap_coefficients(k, Variant.parse(variant)).items())
    cur = {(0, 0, 0): 1}
    for _ in range(power):
        nxt: dict = defaultdict(int)
        for (a, b, c), v in cur.items():
            for (da, db, dc), w in terms:
                A, B, C = a + da, b + db, c + dc
                if A + B <= cap and B + C <= cap:
                    nxt[(A, B, C)] += v * w
        cur = nxt
    return cur


def _guard(shape: FiniteInstanceShape, limit: int):
    if shape.edge_count > limit:
        raise TooLarge(f"edge count {shape.edge_count} exceeds the limit {limit}")


def exact_first_moment(shape: FiniteInstanceShape, variant, max_edges: int = DEFAULT_MAX_EDGES) -> ExactMoment:
    """E(N) = 2^n (T!)^2 / (2T)! * coef(p^m, x^T)."""
    variant = Variant.parse(variant)
    _guard(shape, max_edges)
    T = shape.true_edges
    coef = power_coef_uni(shape.k, variant, shape.m, T)
    value = Fraction(2**shape.n * math.factorial(T) ** 2 * coef, math.factorial(2 * T))
    return ExactMoment(value, shape.n, shape.k, shape.profile, variant, Which.FIRST)


def _second_moment(shape, variant, max_edges, pairs):
    variant = Variant.parse(variant)
    _guard(shape, max_edges)
    T = shape.true_edges
    coeffs = trivariate_power(shape.k, variant, shape.m, T)
    total = 0
    for mult, b in pairs:
        a = T - b
        c = coeffs.get((a, b, a), 0)
        if c:
            total += mult * c * math.factorial(a) ** 2 * math.factorial(b) ** 2
    value = Fraction(2**shape.n * total, math.factorial(2 * T))
    return ExactMoment(value, shape.n, shape.k, shape.profile, variant, Which.SECOND)


def exact_second_moment_strict(
    shape: FiniteInstanceShape, variant, max_edges: int = DEFAULT_MAX_TRIVARIATE_EDGES
) -> ExactMoment:
    """E(N^2) summed over the number i of variables where the two assignments agree."""
    if shape.n_r1 and shape.n_r:
        raise ValueError("shape is not strictly regular; use exact_second_moment_2reg")
    r = shape.r if shape.n_r1 == 0 else shape.r + 1
    pairs = [(math.comb(shape.n, i), r * i) for i in range(shape.n + 1)]
    return _second_moment(shape, variant, max_edges, pairs)


def exact_second_moment_2reg(
    shape: FiniteInstanceShape, variant, max_edges: int = DEFAULT_MAX_TRIVARIATE_EDGES
) -> ExactMoment:
    """E(N^2) with separate agreement counts in the two degree classes."""
    r = shape.r
    pairs = [
        (math.comb(shape.n_r, i) * math.comb(shape.n_r1, j), r * i + (r + 1) * j)
        for i in range(shape.n_r + 1)
        for j in range(shape.n_r1 + 1)
    ]
    return _second_moment(shape, variant, max_edges, pairs)


# --- brute force ---------------------------------------------------------


def literal_masks(n: int) -> list[int]:
    """Bitmask over the 2^n assignments of where each literal is true.

    Literal ``2v`` is x_v, ``2v + 1`` is its negation.
    """
    full = (1 << (1 << n)) - 1
    out = []
    for v in range(n):
        pos = 0
        for a in range(1 << n):
            if a >> v & 1:
                pos |= 1 << a
        out += [pos, full & ~pos]
    return out


def literal_degrees(shape: FiniteInstanceShape) -> list[int]:
    degs = []
    for d in shape.degrees():
        degs += [d, d]
    return degs


@dataclass(frozen=True)
class EnumerationResult:
    sat_formula_count: int
    total: int
    moment1: Fraction
    moment2: Fraction


def enumerate_tiny(shape: FiniteInstanceShape, variant, max_edges: int = ENUM_MAX_EDGES) -> EnumerationResult:
    """Exact moments by visiting every formula.

    Distinct literal sequences over the slots are enumerated; each stands for
    ``prod(deg!)`` permutations.  Branches whose completed clauses already
    kill every assignment are pruned (they contribute only to the total).
    """
    variant = Variant.parse(variant)
    if shape.edge_count > max_edges:
        raise TooLarge(f"enumeration needs edge count <= {max_edges}, got {shape.edge_count}")
    k, n = shape.k, shape.n
    masks = literal_masks(n)
    full = (1 << (1 << n)) - 1
    remaining = literal_degrees(shape)
    slots = shape.edge_count
    nae = variant is Variant.NAE
    acc = [0, 0, 0]  # sequences with N > 0, sum N, sum N^2

    def rec(pos, alive, c_or, c_and):
        if pos == slots:
            cnt = alive.bit_count()
            acc[0] += 1
            acc[1] += cnt
            acc[2] += cnt * cnt
            return
        last = pos % k == k - 1
        for lit, left in enumerate(remaining):
            if not left:
                continue
            mk = masks[lit]
            o, a = c_or | mk, c_and & mk
            remaining[lit] -= 1
            if last:
                sat = o & ~a if nae else o
                nxt = alive & sat
                if nxt:
                    rec(pos + 1, nxt, 0, full)
            else:
                rec(pos + 1, alive, o, a)
            remaining[lit] += 1

    rec(0, full, 0, full)
    weight = 1
    for d in literal_degrees(shape):
        weight *= math.factorial(d)
    total = math.factorial(slots)
    return EnumerationResult(
        sat_formula_count=acc[0] * weight,
        total=total,
        moment1=Fraction(acc[1] * weight, total),
        moment2=Fraction(acc[2] * weight, total),
    )


def literal_edge_list(shape: FiniteInstanceShape) -> np.ndarray:
    """Literal id of every literal-side edge, variables in order, x_v before its negation."""
    out = []
    for v, d in enumerate(shape.degrees()):
        out += [2 * v] * d + [2 * v + 1] * d
    return np.array(out, dtype=np.int64)


def _count_words(n):
    return max(1, (1 << n) // 64)


def literal_mask_words(n: int) -> np.ndarray:
    """``literal_masks`` as uint64 word arrays, shape ``(2n, words)``."""
    a = np.arange(1 << n, dtype=np.uint64)
    W = _count_words(n)
    out = np.zeros((2 * n, W), dtype=np.uint64)
    pad = W * 64 - (1 << n)
    for v in range(n):
        bits = ((a >> np.uint64(v)) & np.uint64(1)).astype(bool)
        for lit, b in ((2 * v, bits), (2 * v + 1, ~bits)):
            b = np.concatenate([b, np.zeros(pad, dtype=bool)])
            out[lit] = np.packbits(b, bitorder="little").view("<u8")
    return out


def count_from_slots(lits: np.ndarray, k: int, masks: np.ndarray, variant) -> np.ndarray:
    """(N)-counts for a batch of slot sequences ``lits`` of shape ``(B, k m)``."""
    nae = Variant.parse(variant) is Variant.NAE
    B = lits.shape[0]
    W = masks.shape[1]
    x = masks[lits].reshape(B, -1, k, W)
    sat = np.bitwise_or.reduce(x, axis=2)
    if nae:
        sat &= ~np.bitwise_and.reduce(x, axis=2)
    alive = np.bitwise_and.reduce(sat, axis=1)
    return np.bitwise_count(alive).sum(axis=1, dtype=np.int64)


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean_N: float
    stderr_N: float
    mean_N2: float
    stderr_N2: float
    samples: int
    seed: int


def monte_carlo_moments(shape: FiniteInstanceShape, variant, samples: int, seed: int) -> MonteCarloEstimate:
    """Unbiased E(N), E(N^2) estimates over uniformly random matchings."""
    if shape.n > 25:
        raise TooLarge("Monte Carlo counts every assignment; n must be <= 25")
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    masks = literal_mask_words(shape.n)
    edges = literal_edge_list(shape)
    per = shape.edge_count * masks.shape[1] * 8
    batch = max(1, min(samples, (1 << 26) // max(per, 1)))
    s1 = s2 = s3 = s4 = 0.0
    done = 0
    while done < samples:
        b = min(batch, samples - done)
        lits = rng.permuted(np.broadcast_to(edges, (b, edges.size)), axis=1)
        N = count_from_slots(lits, shape.k, masks, variant).astype(float)
        s1 += N.sum()
        s2 += (N * N).sum()
        s3 += (N**3).sum()
        s4 += (N**4).sum()
        done += b
    m1, m2 = s1 / samples, s2 / samples
    var1 = max(m2 - m1 * m1, 0.0)
    var2 = max(s4 / samples - m2 * m2, 0.0)
    return MonteCarloEstimate(
        mean_N=m1,
        stderr_N=math.sqrt(var1 / samples),
        mean_N2=m2,
        stderr_N2=math.sqrt(var2 / samples),
        samples=samples,
        seed=seed,
    )
