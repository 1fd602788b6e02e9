"""Regular random CNF instances from the configuration (permutation) model."""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np

from .ensemble import FiniteInstanceShape, Variant, make_profile, make_shape
from .errors import TooLarge
from .exact_oracle import literal_edge_list, literal_masks

MAX_COUNT_VARS = 25


@dataclass(frozen=True)
class FormulaInstance:
    """Clauses hold signed 1-based variable indices in slot order."""

    n: int
    m: int
    k: int
    clauses: tuple[tuple[int, ...], ...]
    degrees: tuple[int, ...]
    seed: int | None
    alpha: Fraction | None = None

    @property
    def simple(self) -> bool:
        return is_simple(self)

    def literal_counts(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for cl in self.clauses:
            for lit in cl:
                out[lit] = out.get(lit, 0) + 1
        return out


def _to_signed(lit_ids: np.ndarray) -> np.ndarray:
    v = lit_ids // 2 + 1
    return np.where(lit_ids % 2 == 0, v, -v)


def generate(shape: FiniteInstanceShape, seed: int) -> FormulaInstance:
    """Uniform matching of literal edges to clause slots, reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    edges = literal_edge_list(shape)
    slots = _to_signed(edges[rng.permutation(edges.size)]).reshape(shape.m, shape.k)
    return FormulaInstance(
        n=shape.n,
        m=shape.m,
        k=shape.k,
        clauses=tuple(tuple(int(x) for x in row) for row in slots),
        degrees=shape.degrees(),
        seed=int(seed),
        alpha=shape.profile.alpha_exact,
    )


def is_simple(inst: FormulaInstance) -> bool:
    """No clause repeats a variable (as the same or the complementary literal)."""
    return all(len({abs(x) for x in cl}) == len(cl) for cl in inst.clauses)


def generate_simple(shape: FiniteInstanceShape, seed: int, max_tries: int = 100_000):
    """Rejection-sample a simple instance; returns ``(instance, rejections)``.

    Attempt ``j`` uses the seed sequence ``(seed, j)``.
    """
    for j in range(max_tries):
        s = int(np.random.SeedSequence([seed, j]).generate_state(1, np.uint64)[0])
        inst = generate(shape, s)
        if is_simple(inst):
            return inst, j
    raise RuntimeError(f"no simple instance in {max_tries} attempts")


@lru_cache(maxsize=32)
def _masks(n):
    return literal_masks(n)


def count_assignments(inst: FormulaInstance, variant) -> int:
    """Number of (NAE-)satisfying assignments, by bitmask exhaustion."""
    if inst.n > MAX_COUNT_VARS:
        raise TooLarge(f"exhaustive counting is limited to n <= {MAX_COUNT_VARS}")
    nae = Variant.parse(variant) is Variant.NAE
    masks = _masks(inst.n)
    alive = (1 << (1 << inst.n)) - 1
    for cl in inst.clauses:
        ids = [2 * (x - 1) if x > 0 else 2 * (-x - 1) + 1 for x in cl]
        o, a = 0, alive
        for i in ids:
            o |= masks[i]
            a &= masks[i]
        alive &= (o & ~a) if nae else o
        if not alive:
            return 0
    return alive.bit_count()


def to_dimacs(inst: FormulaInstance, sink=None) -> str:
    """DIMACS CNF text (written to ``sink`` when given) with provenance comments."""
    lines = [f"c k {inst.k}"]
    if inst.alpha is not None:
        lines.append(f"c alpha {inst.alpha}")
    if inst.degrees:
        lo = min(inst.degrees)
        lines.append(
            f"c degrees r={lo} n_r={inst.degrees.count(lo)} n_r1={len(inst.degrees) - inst.degrees.count(lo)}"
        )
    if inst.seed is not None:
        lines.append(f"c seed {inst.seed}")
    lines.append(f"p cnf {inst.n} {inst.m}")
    lines += [" ".join(str(x) for x in cl) + " 0" for cl in inst.clauses]
    text = "\n".join(lines) + "\n"
    if sink is not None:
        sink.write(text)
    return text


def parse_dimacs(text: str) -> FormulaInstance:
    n = m = None
    seed = alpha = None
    nums: list[int] = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("c"):
            if mt := re.match(r"c seed (-?\d+)", line):
                seed = int(mt.group(1))
            elif mt := re.match(r"c alpha (\S+)", line):
                alpha = Fraction(mt.group(1))
            continue
        if line.startswith("p"):
            _, fmt, a, b = line.split()
            if fmt != "cnf":
                raise ValueError(f"not a CNF header: {line!r}")
            n, m = int(a), int(b)
            continue
        nums += [int(x) for x in line.split()]
    if n is None:
        raise ValueError("missing 'p cnf' header")
    clauses, cur = [], []
    for x in nums:
        if x == 0:
            clauses.append(tuple(cur))
            cur = []
        else:
            cur.append(x)
    if cur:
        raise ValueError("last clause is not terminated by 0")
    if len(clauses) != m:
        raise ValueError(f"header announces {m} clauses, found {len(clauses)}")
    k = len(clauses[0]) if clauses else 0
    counts = [0] * n
    for cl in clauses:
        for x in cl:
            if x > 0:
                counts[x - 1] += 1
    return FormulaInstance(n, m, k, tuple(clauses), tuple(counts), seed, alpha)


def write_batch(shape: FiniteInstanceShape, count: int, seed: int, out_dir, simple_only: bool = False) -> dict:
    """Write ``count`` instances with seeds ``seed, seed+1, ...`` plus ``manifest.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    simple = rejections = 0
    for i in range(count):
        s = seed + i
        if simple_only:
            inst, rej = generate_simple(shape, s)
            rejections += rej
        else:
            inst = generate(shape, s)
        name = f"regular_k{shape.k}_n{shape.n}_{i:05d}.cnf"
        with open(out / name, "w") as fh:
            to_dimacs(inst, fh)
        ok = is_simple(inst)
        simple += ok
        entries.append({"file": name, "seed": s, "instance_seed": inst.seed, "simple": ok})
    manifest = {
        "schema": "regksat.gen/1",
        "k": shape.k,
        "n": shape.n,
        "m": shape.m,
        "alpha": str(shape.profile.alpha_exact),
        "r": shape.r,
        "n_r": shape.n_r,
        "n_r1": shape.n_r1,
        "count": count,
        "seed": seed,
        "simple_only": simple_only,
        "simple_fraction": simple / count if count else None,
        "rejections": rejections if simple_only else None,
        "instances": entries,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write(os.linesep)
    return manifest


def shape_from(k: int, n: int, r: int | None = None, alpha=None) -> FiniteInstanceShape:
    if (r is None) == (alpha is None):
        raise ValueError("give exactly one of r and alpha")
    prof = make_profile(k, Fraction(2 * r, k) if r is not None else alpha)
    return make_shape(prof, n)
