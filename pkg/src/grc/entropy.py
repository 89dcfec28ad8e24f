"""Entropy ledgers, closed physical transformations and reversibility checks.

Entropies are floats. Only the conditions that are themselves stated in
terms of entropy (closedness of a physical step, non-entropy-ejection) are
decided with the tolerance ``tol``. Conditional reversibility is decided
combinatorially, as a subpermutation test on the restricted matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .cdu import is_deterministic, is_subpermutation
from .errors import (
    KeyOutsideSpace,
    NotADistribution,
    NotClosedTransformation,
    NotDeterministic,
    ShapeMismatch,
)
from .partitioned import PMatrix, PSet, aggregate, aggregate_dist
from .subdist import Matrix, Subdist, apply, restrict_rows, support_matrix

DEFAULT_TOL = 1e-9


def entropy(p: Subdist, base: float = 2.0) -> float:
    """Shannon entropy ``-Σ p_x log p_x`` with ``0 log 0 = 0``."""
    h = 0.0
    for v in p.entries.values():
        f = float(v)
        h -= f * math.log(f)
    return h / math.log(base) if h else 0.0


@dataclass(frozen=True)
class CompContext:
    dist: Subdist

    def __post_init__(self):
        if self.dist.mass != 1:
            raise NotADistribution(f"a context must have mass 1, got {self.dist.mass}")

    @property
    def space(self):
        return self.dist.space


@dataclass(frozen=True)
class PhysContext:
    pspace: PSet
    dist: Subdist

    def __post_init__(self):
        if self.dist.space != self.pspace.elements:
            raise ShapeMismatch("context distribution is not over the partitioned set")
        if self.dist.mass != 1:
            raise NotADistribution(f"a context must have mass 1, got {self.dist.mass}")

    def computational(self) -> CompContext:
        return CompContext(aggregate_dist(self.dist, self.pspace))


@dataclass(frozen=True)
class EntropyLedger:
    h_phy: float
    h_comp: float
    h_nc: float

    def to_json(self) -> dict:
        return {k: _sig12(getattr(self, k)) for k in ("h_phy", "h_comp", "h_nc")}


def _sig12(x: float) -> float:
    out = float(f"{x:.12g}")
    return 0.0 if out == 0 else out


def ledger(ctx: PhysContext, base: float = 2.0) -> EntropyLedger:
    h_phy = entropy(ctx.dist, base)
    h_comp = entropy(aggregate_dist(ctx.dist, ctx.pspace), base)
    return EntropyLedger(h_phy, h_comp, h_phy - h_comp)


Context = Union[CompContext, Subdist]


def _dist(p) -> Subdist:
    return p.dist if isinstance(p, (CompContext, PhysContext)) else p


def is_comp_transformation(m: Matrix, p: Context, q: Context) -> bool:
    return apply(_dist(p), m) == _dist(q)


def is_phys_transformation(
    m: PMatrix, p: PhysContext, q: PhysContext, tol: float = DEFAULT_TOL, base: float = 2.0
) -> bool:
    if p.pspace != m.dom or q.pspace != m.cod:
        raise ShapeMismatch("contexts do not live on the matrix's partitioned sets")
    if apply(p.dist, m.matrix) != q.dist:
        return False
    return abs(entropy(p.dist, base) - entropy(q.dist, base)) <= tol


def restrict(m: Matrix, p: Context) -> Matrix:
    """Rows of ``m`` on the support of ``p``; the codomain is unchanged."""
    p = _dist(p)
    if p.space != m.dom:
        raise KeyOutsideSpace("context space differs from the matrix domain")
    return restrict_rows(m, p.support)


def is_conditionally_reversible(m: Matrix, p: Context) -> bool:
    if not is_deterministic(m):
        raise NotDeterministic("conditional reversibility is defined for deterministic matrices only")
    p = _dist(p)
    if p.space != m.dom:
        raise ShapeMismatch("context space differs from the matrix domain")
    return p.support <= support_matrix(m) and is_subpermutation(restrict(m, p))


def push(m: PMatrix, p: PhysContext) -> PhysContext:
    if p.pspace != m.dom:
        raise ShapeMismatch("context does not live on the matrix domain")
    return PhysContext(m.cod, apply(p.dist, m.matrix))


def _closed_target(m: PMatrix, p: PhysContext, tol: float, base: float) -> PhysContext:
    if p.pspace != m.dom:
        raise ShapeMismatch("context does not live on the matrix domain")
    q = apply(p.dist, m.matrix)
    if q.mass != 1:
        raise NotClosedTransformation(f"image of the context has mass {q.mass}, not 1")
    gap = entropy(p.dist, base) - entropy(q, base)
    if abs(gap) > tol:
        raise NotClosedTransformation(f"physical entropy changes by {-gap:.12g}")
    return PhysContext(m.cod, q)


def is_non_entropy_ejecting(m: PMatrix, p: PhysContext, tol: float = DEFAULT_TOL, base: float = 2.0) -> bool:
    """True unless the step loses computational entropy.

    For a closed step this is the same as non-computational entropy not
    increasing; equality counts as non-ejecting.
    """
    q = _closed_target(m, p, tol, base)
    return ledger(p, base).h_comp <= ledger(q, base).h_comp + tol


def is_free_phy(m: PMatrix, p: PhysContext, tol: float = DEFAULT_TOL, base: float = 2.0) -> bool:
    return is_non_entropy_ejecting(m, p, tol, base) and is_deterministic(aggregate(m))


def is_free_comp(m: Matrix, p: Context) -> bool:
    return is_conditionally_reversible(m, p)


@dataclass(frozen=True)
class FundamentalCheck:
    nee: bool
    condrev: bool
    agree: bool


def check_fundamental(m: PMatrix, p: PhysContext, tol: float = DEFAULT_TOL, base: float = 2.0) -> FundamentalCheck:
    """Decide both sides of the physical/computational reversibility equivalence."""
    qm = aggregate(m)
    if not is_deterministic(qm):
        raise NotDeterministic("the aggregated step is not deterministic")
    nee = is_non_entropy_ejecting(m, p, tol, base)
    condrev = is_conditionally_reversible(qm, aggregate_dist(p.dist, p.pspace))
    return FundamentalCheck(nee, condrev, nee == condrev)
