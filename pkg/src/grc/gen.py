"""Seeded random instances: spaces, subdistributions, matrices, partitioned data.

All probabilities are rationals whose denominators start at most
``max_den`` (64 by default). Products of such values are exact but may have
larger denominators.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .entropy import PhysContext
from .partitioned import PMatrix, PSet, discrete_pset, make_pset
from .subdist import (
    ONE_Q,
    Label,
    Matrix,
    Space,
    Subdist,
    _subdist_unchecked,
    apply,
    matrix_unchecked,
)

MAX_DEN = 64

SUBDIST_KINDS = ("zero", "unit", "dist", "sub")
MATRIX_KINDS = ("general", "stochastic", "deterministic", "function", "subperm", "quasi_total")


def space(n: int, tag: str = "s") -> Space:
    return tuple(f"{tag}{i}" for i in range(n))


def composition(rng: random.Random, total: int, parts: int) -> list[int]:
    """Random composition of ``total`` into ``parts`` positive integers."""
    if parts <= 0:
        return []
    if parts > total:
        raise ValueError("need total >= parts")
    cuts = sorted(rng.sample(range(1, total), parts - 1))
    bounds = [0, *cuts, total]
    return [b - a for a, b in zip(bounds, bounds[1:])]


def subdist(
    rng: random.Random, sp: Space, kind: str | None = None, max_den: int = MAX_DEN, within: Sequence[Label] | None = None
) -> Subdist:
    """Random subdistribution on ``sp`` supported inside ``within`` (default: all of ``sp``)."""
    pool = list(sp if within is None else within)
    if kind is None:
        kind = rng.choice(SUBDIST_KINDS)
    if not pool or kind == "zero":
        return _subdist_unchecked(sp, {})
    if kind == "unit":
        return _subdist_unchecked(sp, {rng.choice(pool): ONE_Q})
    if kind == "dist":
        k = rng.randint(1, min(len(pool), max_den))
        den = rng.randint(k, max_den)
        weights = composition(rng, den, k)
    else:
        k = rng.randint(1, min(len(pool), max(1, max_den - 1)))
        den = rng.randint(k + 1, max(k + 1, max_den))
        weights = composition(rng, rng.randint(k, den - 1), k)
    chosen = rng.sample(pool, k)
    return _subdist_unchecked(sp, {x: Fraction(w, den) for x, w in zip(chosen, weights)})


def distribution(rng: random.Random, sp: Space, max_den: int = MAX_DEN, within=None) -> Subdist:
    return subdist(rng, sp, rng.choice(("unit", "dist", "dist")), max_den, within)


def matrix(rng: random.Random, dom: Space, cod: Space, kind: str | None = None, max_den: int = MAX_DEN) -> Matrix:
    if kind is None:
        kind = rng.choice(MATRIX_KINDS)
    rows: dict = {}
    if kind in ("subperm", "permutation"):
        k = min(len(dom), len(cod))
        if kind == "subperm":
            k = rng.randint(0, k)
        for x, y in zip(rng.sample(list(dom), k), rng.sample(list(cod), k)):
            rows[x] = {y: ONE_Q}
        return matrix_unchecked(dom, cod, rows)
    row_kinds = {
        "general": ("zero", "unit", "dist", "sub", "sub"),
        "stochastic": ("unit", "dist"),
        "deterministic": ("zero", "unit", "unit"),
        "function": ("unit",),
        "quasi_total": ("zero", "unit", "dist"),
    }[kind]
    for x in dom:
        rows[x] = dict(subdist(rng, cod, rng.choice(row_kinds), max_den).items())
    return matrix_unchecked(dom, cod, rows)


def pset(rng: random.Random, elements: Space) -> PSet:
    style = rng.random()
    if style < 0.15:
        return discrete_pset(elements)
    k = rng.randint(1, len(elements))
    groups: dict = {}
    for x in elements:
        groups.setdefault(rng.randrange(k), []).append(x)
    return make_pset(elements, list(groups.values()))


def split(rng: random.Random, value: Fraction, targets: Sequence[Label]) -> dict:
    """Divide ``value`` among a random nonempty subset of ``targets``."""
    k = rng.randint(1, len(targets))
    chosen = rng.sample(list(targets), k)
    weights = composition(rng, rng.randint(k, k + 6), k)
    total = sum(weights)
    return {y: value * w / total for y, w in zip(chosen, weights)}


def pmatrix(rng: random.Random, dom: PSet, cod: PSet, kind: str | None = None, max_den: int = MAX_DEN) -> PMatrix:
    """Random partitioned matrix: a block-level matrix, each block entry split among microstates."""
    mbar = matrix(rng, dom.labels, cod.labels, kind, max_den)
    members = cod.members
    rows = {}
    for x in dom.elements:
        acc: dict = {}
        for yb, v in mbar.rows[dom.block_of[x]].items():
            acc.update(split(rng, v, members[yb]))
        rows[x] = acc
    return PMatrix(dom, cod, matrix_unchecked(dom.elements, cod.elements, rows))


def random_pset(rng: random.Random, n: int, tag: str) -> PSet:
    return pset(rng, space(n, tag))


def _northwest(src: list, dst: list) -> dict:
    """Coupling of two equal-mass lists of ``(label, mass)`` by the northwest-corner rule."""
    plan: dict = {}
    i = j = 0
    a = src[0][1] if src else 0
    b = dst[0][1] if dst else 0
    while i < len(src) and j < len(dst):
        t = min(a, b)
        if t:
            plan.setdefault(src[i][0], {})[dst[j][0]] = t
        a -= t
        b -= t
        if a == 0:
            i += 1
            a = src[i][1] if i < len(src) else 0
        if b == 0:
            j += 1
            b = dst[j][1] if j < len(dst) else 0
    return plan


def closed_instance(
    rng: random.Random,
    max_dim: int = 6,
    dom: PSet | None = None,
    p: Subdist | None = None,
    injective: bool | None = None,
    max_den: int = MAX_DEN,
    tag: str = "y",
) -> tuple[PMatrix, PhysContext]:
    """A closed physical transformation from ``p`` whose aggregate is deterministic.

    The image context carries a rearrangement of ``p``'s values, so the
    physical entropy is preserved exactly. ``injective`` forces the block map
    on supported blocks to be injective (True), to merge two supported blocks
    (False), or leaves it random (None).
    """
    if dom is None:
        dom = random_pset(rng, rng.randint(1, max_dim), "x")
    if p is None:
        p = distribution(rng, dom.elements, max_den)
    supported = [b for b in dom.labels if any(p[x] for x in dom.members[b])]
    idle = [b for b in dom.labels if b not in supported]
    n_supp = len(p.support)

    for _ in range(50):
        lo = len(supported) if injective else 1
        if injective is False and len(supported) >= 2:
            lo = 1
        k_b = rng.randint(lo, max(lo, max_dim))
        if injective:
            images = rng.sample(range(k_b), len(supported))
        elif injective is False and len(supported) >= 2:
            images = [rng.randrange(k_b) for _ in supported]
            images[1] = images[0]
        else:
            images = [rng.randrange(k_b) for _ in supported]
        block_map = dict(zip(supported, images))
        for a in idle:
            block_map[a] = None if rng.random() < 0.3 else rng.randrange(k_b)
        need = [0] * k_b
        for a in supported:
            need[block_map[a]] += sum(1 for x in dom.members[a] if p[x])
        sizes = [max(nd, 1) for nd in need]
        if sum(sizes) <= max(max_dim, n_supp):
            break
    else:  # fall back to one codomain block per distinct image
        used = sorted({block_map[a] for a in supported})
        remap = {b: i for i, b in enumerate(used)}
        k_b = len(used)
        block_map = {a: remap[block_map[a]] for a in supported}
        block_map.update({a: (rng.randrange(k_b) if k_b else None) for a in idle})
        need = [0] * k_b
        for a in supported:
            need[block_map[a]] += sum(1 for x in dom.members[a] if p[x])
        sizes = [max(nd, 1) for nd in need]

    room = max(max_dim, n_supp) - sum(sizes)
    for b in range(k_b):
        if room > 0 and rng.random() < 0.3:
            sizes[b] += 1
            room -= 1
    counter = iter(range(sum(sizes)))
    cod_blocks = [[f"{tag}{next(counter)}" for _ in range(s)] for s in sizes]
    cod = make_pset([y for blk in cod_blocks for y in blk], cod_blocks)

    rows: dict = {x: {} for x in dom.elements}
    for b in range(k_b):
        sources = [x for a in supported if block_map[a] == b for x in dom.members[a] if p[x]]
        if not sources:
            continue
        rng.shuffle(sources)
        values = [p[x] for x in sources]
        rng.shuffle(values)
        targets = rng.sample(cod_blocks[b], len(sources))
        plan = _northwest([(x, p[x]) for x in sources], list(zip(targets, values)))
        for x, out in plan.items():
            rows[x] = {y: t / p[x] for y, t in out.items()}
    for a in dom.labels:
        b = block_map[a]
        for x in dom.members[a]:
            if p[x] or b is None:
                continue
            rows[x] = split(rng, ONE_Q, cod_blocks[b])
    m = PMatrix(dom, cod, matrix_unchecked(dom.elements, cod.elements, rows))
    return m, PhysContext(dom, p)


def condrev_instance(
    rng: random.Random,
    max_dim: int = 6,
    dom: Space | None = None,
    p: Subdist | None = None,
    max_den: int = MAX_DEN,
    tag: str = "y",
) -> tuple[Matrix, Subdist]:
    """Deterministic matrix injective on the support of the distribution ``p``."""
    if dom is None:
        dom = space(rng.randint(1, max_dim), "x")
    if p is None:
        p = distribution(rng, dom, max_den)
    supp = [x for x in dom if p[x]]
    cod = space(rng.randint(max(1, len(supp)), max(len(supp), max_dim)), tag)
    rows: dict = {}
    for x, y in zip(supp, rng.sample(list(cod), len(supp))):
        rows[x] = {y: ONE_Q}
    for x in dom:
        if x not in rows and rng.random() < 0.7:
            rows[x] = {rng.choice(cod): ONE_Q}
    return matrix_unchecked(dom, cod, rows), p


def probes(rng: random.Random, sp: Space, within: Sequence[Label], count: int = 50) -> list[Subdist]:
    """Test subdistributions supported in ``within``.

    Every unit and every two-point half mixture comes first (these are the
    witnesses that separate the entropy characterisations), then random
    subdistributions until ``count`` probes are collected.
    """
    pool = list(within)
    out = [_subdist_unchecked(sp, {x: ONE_Q}) for x in pool]
    half = Fraction(1, 2)
    out += [_subdist_unchecked(sp, {a: half, b: half}) for i, a in enumerate(pool) for b in pool[i + 1 :]]
    while len(out) < count and pool:
        out.append(subdist(rng, sp, rng.choice(("dist", "sub")), within=pool))
    return out[: max(count, len(pool) + len(pool) * (len(pool) - 1) // 2)]


def image(p: Subdist, m: Matrix) -> Subdist:
    return apply(p, m)
