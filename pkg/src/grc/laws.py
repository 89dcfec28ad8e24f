"""Randomised law suite with greedy shrinking.

Every law is a generator of random cases plus a predicate. A case whose
premise does not hold is skipped, not counted as a pass. The first failing
case of each law is shrunk by deleting labels and simplifying entries, and
reported with the seed string that regenerates it.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable

from . import gen
from .cdu import (
    associator,
    copy_matrix,
    discard_matrix,
    dom_matrix,
    is_deterministic,
    is_quasi_total,
    is_subpermutation,
    is_total,
    left_unitor,
    right_unitor,
    verify_partial_iso,
    PartialIsoWitness,
)
from .entropy import (
    DEFAULT_TOL,
    PhysContext,
    check_fundamental,
    entropy,
    is_conditionally_reversible,
    is_non_entropy_ejecting,
    ledger,
    push,
)
from .errors import GrcError, NotColumnSubstochastic
from .partitioned import (
    PMatrix,
    PSet,
    aggregate,
    aggregate_dist,
    expand_space,
    is_partitioned,
    lift,
    make_pset,
    pidentity,
    pmatrix_equiv,
    product_pset,
)
from .subdist import (
    ONE,
    Matrix,
    Subdist,
    _subdist_unchecked,
    apply,
    compose,
    format_label,
    identity,
    kron,
    matrix_to_json,
    matrix_unchecked,
    product_space,
    structural,
    subdist_to_json,
    support_matrix,
    swap_matrix,
    tensor_dist,
    transpose,
    transpose_unchecked,
)


@dataclass(frozen=True)
class Ops:
    """Operations under test. Swap one out to check that the suite notices."""

    compose: Callable = compose
    kron: Callable = kron
    transpose: Callable = transpose
    apply: Callable = apply
    aggregate: Callable = aggregate
    lift: Callable = lift


DEFAULT_OPS = Ops()
#: Transpose that skips the column-mass check; the partial-inverse law must reject it.
MUTANT_TRANSPOSE = Ops(transpose=transpose_unchecked)


class Skip(Exception):
    """The case does not satisfy the law's premise."""


def premise(cond: bool) -> None:
    if not cond:
        raise Skip


@dataclass(frozen=True)
class Law:
    id: str
    summary: str
    generate: Callable[[random.Random, int], tuple]
    holds: Callable[[tuple, Ops, float], bool]


LAWS: dict[str, Law] = {}


def law(law_id: str, summary: str, generate: Callable):
    def register(fn):
        LAWS[law_id] = Law(law_id, summary, generate, fn)
        return fn

    return register


# -- generators -----------------------------------------------------------------


def _n(rng, max_dim):
    return rng.randint(1, max_dim)


def _spaces(rng, max_dim, tags):
    return [gen.space(_n(rng, max_dim), t) for t in tags]


def _mat(rng, dom, cod, kind=None):
    return gen.matrix(rng, dom, cod, kind)


def g_chain3(rng, max_dim):
    a, b, c, d = _spaces(rng, max_dim, "abcd")
    return _mat(rng, a, b), _mat(rng, b, c), _mat(rng, c, d)


def g_one(rng, max_dim, kind=None):
    a, b = _spaces(rng, max_dim, "ab")
    return (_mat(rng, a, b, kind),)


def g_pair_chain(kind):
    def g(rng, max_dim):
        a, b, c = _spaces(rng, max_dim, "abc")
        return _mat(rng, a, b, kind), _mat(rng, b, c, kind)

    return g


def g_pair_par(kind):
    def g(rng, max_dim):
        a, b, c, d = _spaces(rng, max_dim, "abcd")
        return _mat(rng, a, b, kind), _mat(rng, c, d, kind)

    return g


def g_bifunctor(rng, max_dim):
    small = max(1, min(max_dim, 3))
    a, b, c, d, e, f = _spaces(rng, small, "abcdef")
    return _mat(rng, a, b), _mat(rng, b, c), _mat(rng, d, e), _mat(rng, e, f)


def g_par3(rng, max_dim):
    small = max(1, min(max_dim, 3))
    a, b, c, d, e, f = _spaces(rng, small, "abcdef")
    return _mat(rng, a, b), _mat(rng, c, d), _mat(rng, e, f)


def g_dist_and_chain(rng, max_dim):
    a, b, c = _spaces(rng, max_dim, "abc")
    return gen.subdist(rng, a), _mat(rng, a, b), _mat(rng, b, c)


def g_dist_and_matrix(rng, max_dim):
    a, b = _spaces(rng, max_dim, "ab")
    return gen.subdist(rng, a), _mat(rng, a, b)


def g_two_dists_two_mats(rng, max_dim):
    a, b, c, d = _spaces(rng, max_dim, "abcd")
    return gen.subdist(rng, a), gen.subdist(rng, c), _mat(rng, a, b), _mat(rng, c, d)


def g_space(rng, max_dim):
    return (gen.space(_n(rng, max_dim), "a"),)


def g_two_spaces(rng, max_dim):
    return tuple(_spaces(rng, max_dim, "ab"))


def g_mixed_one(rng, max_dim):
    return g_one(rng, max_dim, rng.choice(gen.MATRIX_KINDS + ("general", "subperm")))


def g_stochastic_tail(rng, max_dim):
    a, b, c = _spaces(rng, max_dim, "abc")
    f = _mat(rng, a, b, rng.choice(("stochastic", "function", "quasi_total", "general")))
    return f, _mat(rng, b, c, "stochastic")


def g_subdists(rng, max_dim):
    a, b = _spaces(rng, max_dim, "ab")
    return gen.subdist(rng, a), gen.subdist(rng, b)


def g_spread_subdists(rng, max_dim):
    a, b = _spaces(rng, max_dim, "ab")
    return tuple(gen.subdist(rng, sp, rng.choice(("dist", "sub"))) for sp in (a, b))


def g_pmatrix_chain(rng, max_dim):
    a, b, c = (gen.random_pset(rng, _n(rng, max_dim), t) for t in "abc")
    return gen.pmatrix(rng, a, b), gen.pmatrix(rng, b, c)


def g_pmatrix_par(rng, max_dim):
    small = max(1, min(max_dim, 4))
    a, b, c, d = (gen.random_pset(rng, _n(rng, small), t) for t in "abcd")
    return gen.pmatrix(rng, a, b), gen.pmatrix(rng, c, d)


def g_pmatrix_one(rng, max_dim):
    a, b = (gen.random_pset(rng, _n(rng, max_dim), t) for t in "ab")
    return (gen.pmatrix(rng, a, b, rng.choice(gen.MATRIX_KINDS)),)


def g_pmatrix_and_equiv_dists(rng, max_dim):
    a, b = (gen.random_pset(rng, _n(rng, max_dim), t) for t in "ab")
    m = gen.pmatrix(rng, a, b)
    p = gen.subdist(rng, a.elements)
    pbar = aggregate_dist(p, a)
    acc: dict = {}
    for blk_name, v in pbar.items():
        acc.update(gen.split(rng, v, a.members[blk_name]))
    return m, p, _subdist_unchecked(a.elements, acc)


def g_pmatrix_and_dist(rng, max_dim):
    a, b = (gen.random_pset(rng, _n(rng, max_dim), t) for t in "ab")
    return gen.pmatrix(rng, a, b), gen.subdist(rng, a.elements)


def g_pmatrix_pair_same_shape(rng, max_dim):
    a, b = (gen.random_pset(rng, _n(rng, max_dim), t) for t in "ab")
    m = gen.pmatrix(rng, a, b)
    if rng.random() < 0.5:
        rows = {}
        for x in a.elements:
            acc: dict = {}
            for yb, v in aggregate(m).rows[a.block_of[x]].items():
                acc.update(gen.split(rng, v, b.members[yb]))
            rows[x] = acc
        n = PMatrix(a, b, matrix_unchecked(a.elements, b.elements, rows))
    else:
        n = gen.pmatrix(rng, a, b)
    return m, n


def g_lift(rng, max_dim):
    a, b = _spaces(rng, max_dim, "ab")
    mbar = _mat(rng, a, b)
    return mbar, expand_space(a, rng.randint(1, 4)), expand_space(b, rng.randint(1, 4))


def g_lift_random_blocks(rng, max_dim):
    """Lift into partitioned sets with blocks of unequal sizes."""
    a, b = _spaces(rng, max_dim, "ab")
    mbar = _mat(rng, a, b)

    def blow_up(sp, tag):
        blocks = [[x] + [f"{x}{tag}{i}" for i in range(1, rng.randint(1, 4))] for x in sp]
        return make_pset([y for blk in blocks for y in blk], blocks)

    return mbar, blow_up(a, "~"), blow_up(b, "~")


def g_ctx_pair(rng, max_dim):
    small = max(1, min(max_dim, 4))
    a, b = (gen.random_pset(rng, _n(rng, small), t) for t in "ab")
    return PhysContext(a, gen.distribution(rng, a.elements)), PhysContext(b, gen.distribution(rng, b.elements))


def g_closed(rng, max_dim):
    m, p = gen.closed_instance(rng, max_dim, injective=rng.choice((None, None, True, False)))
    return m, p


def g_closed_chain(rng, max_dim):
    inj = rng.random() < 0.8
    m, p = gen.closed_instance(rng, max_dim, injective=True if inj else None, tag="b")
    q = push(m, p)
    n, _ = gen.closed_instance(rng, max_dim, dom=m.cod, p=q.dist, injective=True if inj else None, tag="c")
    return m, n, p


def g_closed_par(rng, max_dim):
    small = max(1, min(max_dim, 4))
    inj = rng.random() < 0.8
    m, p = gen.closed_instance(rng, small, dom=gen.random_pset(rng, _n(rng, small), "a"), injective=inj or None, tag="b")
    n, p2 = gen.closed_instance(rng, small, dom=gen.random_pset(rng, _n(rng, small), "c"), injective=inj or None, tag="d")
    return m, n, p, p2


def _condrev_or_det(rng, max_dim, dom=None, p=None, tag="b"):
    if rng.random() < 0.8:
        return gen.condrev_instance(rng, max_dim, dom=dom, p=p, tag=tag)
    dom = dom or gen.space(_n(rng, max_dim), "a")
    p = p or gen.distribution(rng, dom)
    return gen.matrix(rng, dom, gen.space(_n(rng, max_dim), tag), "deterministic"), p


def g_condrev_chain(rng, max_dim):
    m, p = _condrev_or_det(rng, max_dim, dom=gen.space(_n(rng, max_dim), "a"), tag="b")
    q = apply(p, m)
    n, _ = _condrev_or_det(rng, max_dim, dom=m.cod, p=q, tag="c")
    return m, n, p


def g_condrev_par(rng, max_dim):
    m, p = _condrev_or_det(rng, max_dim, dom=gen.space(_n(rng, max_dim), "a"), tag="b")
    n, p2 = _condrev_or_det(rng, max_dim, dom=gen.space(_n(rng, max_dim), "c"), tag="d")
    return m, n, p, p2


def g_det_and_dist(rng, max_dim):
    if rng.random() < 0.4:
        m, p = gen.condrev_instance(rng, max_dim, dom=gen.space(_n(rng, max_dim), "a"), tag="b")
        return m, p
    a, b = _spaces(rng, max_dim, "ab")
    m = _mat(rng, a, b, rng.choice(("deterministic", "function")))
    supp = sorted(support_matrix(m), key=a.index) or list(a)
    return m, gen.distribution(rng, a, within=supp)


# -- helpers --------------------------------------------------------------------


def _mass_ok(m: Matrix) -> bool:
    return all(v >= 0 for r in m.rows.values() for v in r.entries.values()) and all(
        r.mass <= 1 for r in m.rows.values()
    )


def _h_zero(p: Subdist) -> bool:
    return p.is_zero() or p.unit_target() is not None


def _transpose_or_none(m: Matrix, ops: Ops):
    try:
        return ops.transpose(m)
    except NotColumnSubstochastic:
        return None


def partial_iso_via_transpose(m: Matrix, ops: Ops = DEFAULT_OPS) -> bool:
    """``verify_partial_iso(M, ⊤M)``, false when the transpose is not substochastic."""
    t = _transpose_or_none(m, ops)
    if t is None:
        return False
    if not _mass_ok(t):
        raise AssertionError("transpose returned a matrix that is not substochastic")
    return verify_partial_iso(PartialIsoWitness(m, t))


def entropy_preserving_on_support(m: Matrix, rng: random.Random, tol: float, count: int = 50) -> bool:
    supp = [x for x in m.dom if x in support_matrix(m)]
    return all(abs(entropy(apply(p, m)) - entropy(p)) <= tol for p in gen.probes(rng, m.dom, supp, count))


def entropy_nonincreasing(m: Matrix, rng: random.Random, tol: float, count: int = 50) -> bool:
    return all(entropy(apply(p, m)) <= entropy(p) + tol for p in gen.probes(rng, m.dom, m.dom, count))


def _middle_four(a, b):
    """``(A×A)×(B×B) → (A×B)×(A×B)``."""
    return structural(
        product_space(product_space(a, a), product_space(b, b)),
        product_space(product_space(a, b), product_space(a, b)),
        lambda t: ((t[0][0], t[1][0]), (t[0][1], t[1][1])),
    )


# -- subdistribution matrices -----------------------------------------------------


@law("compose.associative", "(MN)P = M(NP)", g_chain3)
def _(case, ops, tol):
    m, n, p = case
    return ops.compose(ops.compose(m, n), p) == ops.compose(m, ops.compose(n, p))


@law("compose.unital", "identities are units for composition", lambda r, d: g_one(r, d))
def _(case, ops, tol):
    (m,) = case
    return ops.compose(identity(m.dom), m) == m == ops.compose(m, identity(m.cod))


@law("kron.bifunctorial", "(M1 N1) x (M2 N2) = (M1 x M2)(N1 x N2)", g_bifunctor)
def _(case, ops, tol):
    m1, n1, m2, n2 = case
    return ops.kron(ops.compose(m1, n1), ops.compose(m2, n2)) == ops.compose(ops.kron(m1, m2), ops.kron(n1, n2))


@law("kron.associative", "Kronecker product is associative up to the associator", g_par3)
def _(case, ops, tol):
    m, n, p = case
    lhs = ops.compose(ops.kron(ops.kron(m, n), p), associator(m.cod, n.cod, p.cod))
    rhs = ops.compose(associator(m.dom, n.dom, p.dom), ops.kron(m, ops.kron(n, p)))
    return lhs == rhs


@law("kron.symmetric", "(M x N) swap = swap (N x M)", g_pair_par(None))
def _(case, ops, tol):
    m, n = case
    return ops.compose(ops.kron(m, n), swap_matrix(m.cod, n.cod)) == ops.compose(
        swap_matrix(m.dom, n.dom), ops.kron(n, m)
    )


@law("kron.unitors", "unit space is a unit for the Kronecker product", lambda r, d: g_one(r, d))
def _(case, ops, tol):
    (m,) = case
    one = identity(ONE)
    left = ops.compose(ops.kron(one, m), left_unitor(m.cod)) == ops.compose(left_unitor(m.dom), m)
    right = ops.compose(ops.kron(m, one), right_unitor(m.cod)) == ops.compose(right_unitor(m.dom), m)
    return left and right


@law("apply.action", "(pM)N = p(MN)", g_dist_and_chain)
def _(case, ops, tol):
    p, m, n = case
    return ops.apply(ops.apply(p, m), n) == ops.apply(p, ops.compose(m, n))


@law("apply.mass", "mass(pM) <= mass(p), with equality for total M", g_dist_and_matrix)
def _(case, ops, tol):
    p, m = case
    q = ops.apply(p, m)
    return q.mass <= p.mass and (not is_total(m) or q.mass == p.mass)


@law("apply.kron", "(p x q)(M x N) = pM x qN", g_two_dists_two_mats)
def _(case, ops, tol):
    p, q, m, n = case
    return ops.apply(tensor_dist(p, q), ops.kron(m, n)) == tensor_dist(ops.apply(p, m), ops.apply(q, n))


# -- copy/discard structure -------------------------------------------------------


@law("copy.counit", "copy then discard either copy is the identity", g_space)
def _(case, ops, tol):
    (x,) = case
    c, d, i = copy_matrix(x), discard_matrix(x), identity(x)
    left = ops.compose(ops.compose(c, ops.kron(d, i)), left_unitor(x))
    right = ops.compose(ops.compose(c, ops.kron(i, d)), right_unitor(x))
    return left == i == right


@law("copy.coassociative", "copy (copy x id) assoc = copy (id x copy)", g_space)
def _(case, ops, tol):
    (x,) = case
    c, i = copy_matrix(x), identity(x)
    lhs = ops.compose(ops.compose(c, ops.kron(c, i)), associator(x, x, x))
    return lhs == ops.compose(c, ops.kron(i, c))


@law("copy.cocommutative", "copy swap = copy", g_space)
def _(case, ops, tol):
    (x,) = case
    return ops.compose(copy_matrix(x), swap_matrix(x, x)) == copy_matrix(x)


@law("copy.uniform", "copy and discard on a product are built from the factors", g_two_spaces)
def _(case, ops, tol):
    a, b = case
    ab = product_space(a, b)
    cp = ops.compose(ops.kron(copy_matrix(a), copy_matrix(b)), _middle_four(a, b)) == copy_matrix(ab)
    dc = ops.compose(ops.kron(discard_matrix(a), discard_matrix(b)), left_unitor(ONE)) == discard_matrix(ab)
    return cp and dc and discard_matrix(ONE) == identity(ONE)


@law("total.iff_discard_natural", "M discard = discard exactly when M is total", g_mixed_one)
def _(case, ops, tol):
    (m,) = case
    return (ops.compose(m, discard_matrix(m.cod)) == discard_matrix(m.dom)) == is_total(m)


@law("deterministic.iff_copy_natural", "M copy = copy (M x M) exactly when M is deterministic", g_mixed_one)
def _(case, ops, tol):
    (m,) = case
    natural = ops.compose(m, copy_matrix(m.cod)) == ops.compose(copy_matrix(m.dom), ops.kron(m, m))
    return natural == is_deterministic(m)


@law("quasi_total.iff_dom_absorbs", "M = dom(M) M exactly when M is quasi-total", g_mixed_one)
def _(case, ops, tol):
    (m,) = case
    return (ops.compose(dom_matrix(m), m) == m) == is_quasi_total(m)


@law("dom.equational", "dom(M) = copy (id x M discard) unitor", g_mixed_one)
def _(case, ops, tol):
    (m,) = case
    x = m.dom
    built = ops.compose(
        ops.compose(copy_matrix(x), ops.kron(identity(x), ops.compose(m, discard_matrix(m.cod)))), right_unitor(x)
    )
    return built == dom_matrix(m)


@law("dom.kron", "dom(M x N) = dom(M) x dom(N)", g_pair_par(None))
def _(case, ops, tol):
    m, n = case
    return dom_matrix(ops.kron(m, n)) == ops.kron(dom_matrix(m), dom_matrix(n))


@law("total.iff_dom_identity", "M is total exactly when dom(M) is the identity", g_mixed_one)
def _(case, ops, tol):
    (m,) = case
    return (dom_matrix(m) == identity(m.dom)) == is_total(m)


@law("deterministic.implies_quasi_total", "deterministic matrices are quasi-total", g_mixed_one)
def _(case, ops, tol):
    (m,) = case
    return not is_deterministic(m) or is_quasi_total(m)


@law("total.cancel", "if g and fg are total then f is total", g_stochastic_tail)
def _(case, ops, tol):
    f, g = case
    premise(is_total(g) and is_total(ops.compose(f, g)))
    return is_total(f)


def _closure(pred, op):
    def holds(case, ops, tol):
        m, n = case
        premise(pred(m) and pred(n))
        return pred(getattr(ops, op)(m, n))

    return holds


for _kind, _pred, _gen_kind in (
    ("deterministic", is_deterministic, "deterministic"),
    ("total", is_total, "stochastic"),
    ("subpermutation", is_subpermutation, "subperm"),
):
    LAWS[f"closure.{_kind}.compose"] = Law(
        f"closure.{_kind}.compose", f"{_kind} matrices compose to {_kind}", g_pair_chain(_gen_kind), _closure(_pred, "compose")
    )
    LAWS[f"closure.{_kind}.kron"] = Law(
        f"closure.{_kind}.kron", f"Kronecker products of {_kind} matrices are {_kind}", g_pair_par(_gen_kind), _closure(_pred, "kron")
    )
LAWS["closure.quasi_total.kron"] = Law(
    "closure.quasi_total.kron",
    "Kronecker products of quasi-total matrices are quasi-total",
    g_pair_par("quasi_total"),
    _closure(is_quasi_total, "kron"),
)


@law(
    "closure.partial_iso.compose",
    "composites of subpermutations are partial isomorphisms with the transposed inverse",
    g_pair_chain("subperm"),
)
def _(case, ops, tol):
    m, n = case
    premise(is_subpermutation(m) and is_subpermutation(n))
    return partial_iso_via_transpose(ops.compose(m, n), ops)


@law(
    "closure.partial_iso.kron",
    "Kronecker products of subpermutations are partial isomorphisms",
    g_pair_par("subperm"),
)
def _(case, ops, tol):
    m, n = case
    premise(is_subpermutation(m) and is_subpermutation(n))
    return partial_iso_via_transpose(ops.kron(m, n), ops)


def g_transpose_case(rng, max_dim):
    a, b = _spaces(rng, max_dim, "ab")
    return (_mat(rng, a, b, rng.choice(("subperm", "deterministic", "general", "function"))),)


@law(
    "subpermutation.iff_transpose_partial_inverse",
    "M is a subpermutation exactly when its transpose is a partial inverse",
    g_transpose_case,
)
def _(case, ops, tol):
    (m,) = case
    try:
        iso = partial_iso_via_transpose(m, ops)
    except AssertionError:
        return False
    return iso == is_subpermutation(m)


@law(
    "subpermutation.transpose_closed",
    "the transpose of a subpermutation is a subpermutation",
    g_transpose_case,
)
def _(case, ops, tol):
    (m,) = case
    premise(is_subpermutation(m))
    t = _transpose_or_none(m, ops)
    return t is not None and is_subpermutation(t)


def _seeded_probe_rng(case) -> random.Random:
    return random.Random(json.dumps(case_to_json(case), sort_keys=True))


@law(
    "subpermutation.three_way",
    "subpermutation, partial iso with the transpose, and entropy preservation on the support agree",
    g_transpose_case,
)
def _(case, ops, tol):
    (m,) = case
    try:
        iso = partial_iso_via_transpose(m, ops)
    except AssertionError:
        return False
    ent = entropy_preserving_on_support(m, _seeded_probe_rng(case), tol)
    return is_subpermutation(m) == iso == ent


@law(
    "deterministic.iff_entropy_nonincreasing",
    "M is deterministic exactly when H(pM) <= H(p) on every probe",
    g_mixed_one,
)
def _(case, ops, tol):
    (m,) = case
    return is_deterministic(m) == entropy_nonincreasing(m, _seeded_probe_rng(case), tol)


# -- partitioned sets and aggregation -----------------------------------------------


@law("closure.partitioned.compose", "composites of partitioned matrices are partitioned", g_pmatrix_chain)
def _(case, ops, tol):
    m, n = case
    return is_partitioned(ops.compose(m.matrix, n.matrix), m.dom, n.cod)


@law("closure.partitioned.kron", "Kronecker products of partitioned matrices are partitioned", g_pmatrix_par)
def _(case, ops, tol):
    m, n = case
    return is_partitioned(
        ops.kron(m.matrix, n.matrix), product_pset(m.dom, n.dom), product_pset(m.cod, n.cod)
    )


@law(
    "partitioned.preserves_equivalence",
    "equivalent subdistributions have equivalent images",
    g_pmatrix_and_equiv_dists,
)
def _(case, ops, tol):
    m, p, p2 = case
    premise(aggregate_dist(p, m.dom) == aggregate_dist(p2, m.dom))
    return aggregate_dist(ops.apply(p, m.matrix), m.cod) == aggregate_dist(ops.apply(p2, m.matrix), m.cod)


@law("aggregate.compose", "aggregate(MN) = aggregate(M) aggregate(N)", g_pmatrix_chain)
def _(case, ops, tol):
    m, n = case
    mn = PMatrix(m.dom, n.cod, ops.compose(m.matrix, n.matrix))
    return ops.aggregate(mn) == ops.compose(ops.aggregate(m), ops.aggregate(n))


@law("aggregate.kron", "aggregate(M x N) = aggregate(M) x aggregate(N)", g_pmatrix_par)
def _(case, ops, tol):
    m, n = case
    mn = PMatrix(product_pset(m.dom, n.dom), product_pset(m.cod, n.cod), ops.kron(m.matrix, n.matrix))
    return ops.aggregate(mn) == ops.kron(ops.aggregate(m), ops.aggregate(n))


@law("aggregate.identity", "aggregate(id) = id", lambda r, d: (gen.random_pset(r, _n(r, d), "a"),))
def _(case, ops, tol):
    (p,) = case
    return ops.aggregate(pidentity(p)) == identity(p.labels)


@law("aggregate.apply", "aggregation commutes with applying a matrix", g_pmatrix_and_dist)
def _(case, ops, tol):
    m, p = case
    lhs = aggregate_dist(ops.apply(p, m.matrix), m.cod)
    return lhs == ops.apply(aggregate_dist(p, m.dom), ops.aggregate(m))


@law("aggregate.preserves_kinds", "aggregation keeps totality and determinism", g_pmatrix_one)
def _(case, ops, tol):
    (m,) = case
    q = ops.aggregate(m)
    return (not is_total(m.matrix) or is_total(q)) and (not is_deterministic(m.matrix) or is_deterministic(q))


@law(
    "aggregate.equivalence",
    "partitioned matrices are equivalent exactly when their aggregates agree",
    g_pmatrix_pair_same_shape,
)
def _(case, ops, tol):
    m, n = case
    return pmatrix_equiv(m, n) == (ops.aggregate(m) == ops.aggregate(n))


@law("lift.section", "aggregate(lift(M)) = M for uniform multiplicities", g_lift)
def _(case, ops, tol):
    mbar, dom, cod = case
    return ops.aggregate(ops.lift(mbar, dom, cod)) == mbar


@law("lift.section_uneven", "aggregate(lift(M)) = M for blocks of unequal size", g_lift_random_blocks)
def _(case, ops, tol):
    mbar, dom, cod = case
    return ops.aggregate(ops.lift(mbar, dom, cod)) == mbar


# -- entropy --------------------------------------------------------------------


@law(
    "entropy.tensor",
    "H(p x q) <= H(p) + H(q), equal exactly when each factor is a distribution or the other has zero entropy",
    g_subdists,
)
def _(case, ops, tol):
    p, q = case
    hp, hq, hpq = entropy(p), entropy(q), entropy(tensor_dist(p, q))
    equal = abs(hpq - hp - hq) <= tol
    expected = (q.mass == 1 or _h_zero(p)) and (p.mass == 1 or _h_zero(q))
    return hpq <= hp + hq + tol and equal == expected


@law(
    "entropy.tensor_distributions",
    "H(p x q) = H(p) + H(q) exactly when p and q are distributions, for factors of positive entropy",
    g_spread_subdists,
)
def _(case, ops, tol):
    p, q = case
    premise(not _h_zero(p) and not _h_zero(q))
    equal = abs(entropy(tensor_dist(p, q)) - entropy(p) - entropy(q)) <= tol
    return equal == (p.mass == 1 and q.mass == 1)


@law("entropy.kernel", "H(p) = 0 exactly for the zero subdistribution and units", lambda r, d: (gen.subdist(r, gen.space(_n(r, d), "a")),))
def _(case, ops, tol):
    (p,) = case
    return (entropy(p) <= tol) == _h_zero(p)


def g_weights(rng, max_dim):
    k = rng.randint(2, max(2, max_dim))
    den = rng.randint(k, gen.MAX_DEN)
    parts = gen.composition(rng, rng.randint(k, den), k)
    return tuple(Fraction(w, den) for w in parts)


def _xlogx(t: Fraction) -> float:
    return float(t) * math.log2(float(t)) if t else 0.0


def g_unit_pair(rng, max_dim):
    return tuple(Fraction(rng.randint(0, d), d) for d in (rng.randint(1, gen.MAX_DEN), rng.randint(1, gen.MAX_DEN)))


@law("entropy.superadditive_pair", "s log s + t log t <= (s+t) log (s+t) for s, t in [0, 1]", g_unit_pair)
def _(case, ops, tol):
    s, t = case
    return _xlogx(s) + _xlogx(t) <= _xlogx(s + t) + tol


@law("entropy.superadditive", "sum of t log t over positive parts is strictly below S log S", g_weights)
def _(case, ops, tol):
    s = float(sum(case))
    lhs = sum(float(t) * math.log2(float(t)) for t in case)
    return lhs < s * math.log2(s) - tol


@law("ledger.monoidal", "entropy ledgers add under the Kronecker product of contexts", g_ctx_pair)
def _(case, ops, tol):
    p, q = case
    both = ledger(PhysContext(product_pset(p.pspace, q.pspace), tensor_dist(p.dist, q.dist)))
    lp, lq = ledger(p), ledger(q)
    return all(
        abs(getattr(both, k) - getattr(lp, k) - getattr(lq, k)) <= tol for k in ("h_phy", "h_comp", "h_nc")
    )


@law("nee.ledger", "change in h_nc is minus the change in h_comp on closed steps", g_closed)
def _(case, ops, tol):
    m, p = case
    before, after = ledger(p), ledger(push(m, p))
    return abs((after.h_nc - before.h_nc) + (after.h_comp - before.h_comp)) <= 2 * tol


@law("closure.nee.compose", "composites of non-entropy-ejecting steps are non-entropy-ejecting", g_closed_chain)
def _(case, ops, tol):
    m, n, p = case
    q = push(m, p)
    premise(is_non_entropy_ejecting(m, p, tol) and is_non_entropy_ejecting(n, q, tol))
    mn = PMatrix(m.dom, n.cod, ops.compose(m.matrix, n.matrix))
    return is_non_entropy_ejecting(mn, p, 2 * tol)


@law("closure.nee.kron", "Kronecker products of non-entropy-ejecting steps are non-entropy-ejecting", g_closed_par)
def _(case, ops, tol):
    m, n, p, p2 = case
    premise(is_non_entropy_ejecting(m, p, tol) and is_non_entropy_ejecting(n, p2, tol))
    mn = PMatrix(product_pset(m.dom, n.dom), product_pset(m.cod, n.cod), ops.kron(m.matrix, n.matrix))
    ctx = PhysContext(mn.dom, tensor_dist(p.dist, p2.dist))
    return is_non_entropy_ejecting(mn, ctx, 4 * tol)


@law("closure.condrev.compose", "composites of conditionally reversible steps are conditionally reversible", g_condrev_chain)
def _(case, ops, tol):
    m, n, p = case
    premise(is_deterministic(m) and is_deterministic(n))
    q = ops.apply(p, m)
    premise(q.mass == 1 and is_conditionally_reversible(m, p) and is_conditionally_reversible(n, q))
    return is_conditionally_reversible(ops.compose(m, n), p)


@law("closure.condrev.kron", "Kronecker products of conditionally reversible steps are conditionally reversible", g_condrev_par)
def _(case, ops, tol):
    m, n, p, p2 = case
    premise(is_deterministic(m) and is_deterministic(n))
    premise(is_conditionally_reversible(m, p) and is_conditionally_reversible(n, p2))
    return is_conditionally_reversible(ops.kron(m, n), tensor_dist(p, p2))


@law(
    "condrev.iff_entropy_preserved",
    "a deterministic step is conditionally reversible exactly when it preserves entropy",
    g_det_and_dist,
)
def _(case, ops, tol):
    m, p = case
    q = ops.apply(p, m)
    premise(q.mass == 1)
    return is_conditionally_reversible(m, p) == (abs(entropy(p) - entropy(q)) <= tol)


@law(
    "fundamental.agree",
    "a closed step with deterministic aggregate is non-entropy-ejecting exactly when its aggregate is conditionally reversible",
    g_closed,
)
def _(case, ops, tol):
    m, p = case
    return check_fundamental(m, p, tol).agree


# -- running and reporting --------------------------------------------------------


_DATA = (Matrix, Subdist, PSet, PMatrix, PhysContext)


def _to_json(obj) -> Any:
    if isinstance(obj, Matrix):
        return matrix_to_json(obj)
    if isinstance(obj, Subdist):
        return {"space": [format_label(x) for x in obj.space], "entries": subdist_to_json(obj)}
    if isinstance(obj, PSet):
        return [[format_label(x) for x in blk] for blk in obj.blocks]
    if isinstance(obj, PMatrix):
        return {"dom": _to_json(obj.dom), "cod": _to_json(obj.cod), "matrix": _to_json(obj.matrix)}
    if isinstance(obj, PhysContext):
        return {"pspace": _to_json(obj.pspace), "dist": _to_json(obj.dist)}
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, tuple):  # a bare space
        return [format_label(x) for x in obj]
    return obj


def case_to_json(case: tuple) -> list:
    return [_to_json(c) for c in case]


def _size(case: tuple) -> tuple:
    """Shrink order: fewer labels first, then smaller denominators and numerators."""
    labels = dens = nums = 0

    def visit(obj):
        nonlocal labels, dens, nums
        if isinstance(obj, Matrix):
            labels += len(obj.dom) + len(obj.cod)
            for r in obj.rows.values():
                visit(r)
        elif isinstance(obj, Subdist):
            for v in obj.entries.values():
                visit(v)
        elif isinstance(obj, PMatrix):
            visit(obj.matrix)
        elif isinstance(obj, PhysContext):
            visit(obj.dist)
        elif isinstance(obj, PSet):
            labels += len(obj.elements)
        elif isinstance(obj, tuple):
            labels += len(obj)
        elif isinstance(obj, Fraction):
            dens += obj.denominator
            nums += obj.numerator

    for c in case:
        visit(c)
    return labels, dens, nums


def _drop_label(obj, lab):
    """Remove ``lab`` from every space in ``obj``; ``None`` if that empties a space."""
    if isinstance(obj, Matrix):
        dom = tuple(x for x in obj.dom if x != lab)
        cod = tuple(y for y in obj.cod if y != lab)
        if not dom or not cod:
            return None
        rows = {x: {y: v for y, v in obj.rows[x].items() if y != lab} for x in dom}
        return matrix_unchecked(dom, cod, rows)
    if isinstance(obj, Subdist):
        sp = tuple(x for x in obj.space if x != lab)
        if not sp:
            return None
        return _subdist_unchecked(sp, {x: v for x, v in obj.items() if x != lab})
    if isinstance(obj, PSet):
        elems = [x for x in obj.elements if x != lab]
        if not elems:
            return None
        blocks = [[x for x in blk if x != lab] for blk in obj.blocks]
        return make_pset(elems, [b for b in blocks if b])
    if isinstance(obj, PMatrix):
        parts = [_drop_label(o, lab) for o in (obj.dom, obj.cod, obj.matrix)]
        return None if None in parts else PMatrix(*parts)
    if isinstance(obj, PhysContext):
        parts = [_drop_label(o, lab) for o in (obj.pspace, obj.dist)]
        return None if None in parts else PhysContext(*parts)
    if isinstance(obj, tuple):
        return tuple(x for x in obj if x != lab) or None
    return obj


def _drop_from_case(case: tuple, lab):
    out = tuple(_drop_label(c, lab) for c in case)
    return None if any(c is None for c in out) else out


def _labels(case: tuple) -> list:
    """Atomic labels of every space in the case; product labels vanish with their factors."""
    seen: dict = {}

    def visit(obj):
        if isinstance(obj, Matrix):
            seen.update(dict.fromkeys(obj.dom))
            seen.update(dict.fromkeys(obj.cod))
        elif isinstance(obj, Subdist):
            seen.update(dict.fromkeys(obj.space))
        elif isinstance(obj, PSet):
            seen.update(dict.fromkeys(obj.elements))
        elif isinstance(obj, PMatrix):
            visit(obj.dom)
            visit(obj.cod)
        elif isinstance(obj, PhysContext):
            visit(obj.pspace)
        elif isinstance(obj, tuple):
            seen.update(dict.fromkeys(obj))

    for c in case:
        visit(c)
    return [x for x in seen if not isinstance(x, tuple)]


def _simpler(v: Fraction) -> list:
    out = [Fraction(0), Fraction(1, 2), Fraction(1)]
    if v.denominator > 1:
        out.append(v.limit_denominator(max(1, v.denominator // 2)))
    return [c for c in dict.fromkeys(out) if c != v]


def _simplify_entries(case):
    """Candidates with one matrix entry replaced by a simpler rational."""
    for ci, comp in enumerate(case):
        if not isinstance(comp, Matrix):
            continue
        for x in comp.dom:
            row = comp.rows[x]
            for y, v in row.items():
                for c in _simpler(v):
                    new_row = dict(row.items())
                    if c:
                        new_row[y] = c
                    else:
                        del new_row[y]
                    if sum(new_row.values()) > 1:
                        continue
                    rows = {z: dict(comp.rows[z].items()) for z in comp.dom}
                    rows[x] = new_row
                    yield case[:ci] + (matrix_unchecked(comp.dom, comp.cod, rows),) + case[ci + 1 :]


def _fails(lw: Law, case, ops, tol) -> bool:
    try:
        return not lw.holds(case, ops, tol)
    except (Skip, GrcError, AssertionError, KeyError, ValueError):
        return False


def shrink(lw: Law, case: tuple, ops: Ops = DEFAULT_OPS, tol: float = DEFAULT_TOL, budget: int = 2000) -> tuple:
    """Greedy shrinking: delete labels, then simplify entries, while the law keeps failing."""
    tries = 0
    improved = True
    while improved and tries < budget:
        improved = False
        size = _size(case)
        for lab in _labels(case):
            tries += 1
            try:
                cand = _drop_from_case(case, lab)
            except GrcError:
                continue
            if cand is not None and _size(cand) < size and _fails(lw, cand, ops, tol):
                case, improved = cand, True
                break
        if improved:
            continue
        for cand in _simplify_entries(case):
            tries += 1
            if tries >= budget:
                break
            if _size(cand) < size and _fails(lw, cand, ops, tol):
                case, improved = cand, True
                break
    return case


@dataclass(frozen=True)
class LawConfig:
    cases: int = 500
    max_dim: int = 5
    seed: int = 42
    tol: float = DEFAULT_TOL
    only: tuple = ()

    def __post_init__(self):
        if self.cases < 1:
            raise ValueError("cases must be at least 1")
        if self.max_dim < 2:
            raise ValueError("max_dim must be at least 2")


@dataclass
class LawResult:
    law_id: str
    summary: str
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    counterexample: dict | None = None

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_json(self) -> dict:
        return {
            "law": self.law_id,
            "summary": self.summary,
            "passed": self.passed,
            "failed": self.failed,
            "skipped": self.skipped,
            "counterexample": self.counterexample,
        }


@dataclass
class LawReport:
    config: LawConfig
    results: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def result(self, law_id: str) -> LawResult:
        return next(r for r in self.results if r.law_id == law_id)

    def to_json(self) -> dict:
        c = self.config
        return {
            "config": {"cases": c.cases, "max_dim": c.max_dim, "seed": c.seed, "tol": c.tol},
            "ok": self.ok,
            "laws": [r.to_json() for r in self.results],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"

    def to_text(self) -> str:
        lines = []
        for r in self.results:
            status = "PASS" if r.ok else "FAIL"
            lines.append(f"{status} {r.law_id}: {r.passed} passed, {r.failed} failed, {r.skipped} skipped")
            if r.counterexample:
                cx = r.counterexample
                lines.append(f"     seed {cx['seed']}: {cx['message']}")
                lines.append("     " + json.dumps(cx["case"], separators=(",", ":")))
        total_fail = sum(1 for r in self.results if not r.ok)
        lines.append(f"{len(self.results) - total_fail}/{len(self.results)} laws passed")
        return "\n".join(lines) + "\n"


def case_rng(seed: int, law_id: str, i: int) -> random.Random:
    return random.Random(f"{seed}:{law_id}:{i}")


def run_law(lw: Law, config: LawConfig, ops: Ops = DEFAULT_OPS) -> LawResult:
    res = LawResult(lw.id, lw.summary)
    for i in range(config.cases):
        case = lw.generate(case_rng(config.seed, lw.id, i), config.max_dim)
        try:
            ok = lw.holds(case, ops, config.tol)
            message = "law does not hold"
        except Skip:
            res.skipped += 1
            continue
        except (GrcError, AssertionError, KeyError, ValueError) as exc:
            ok, message = False, f"{type(exc).__name__}: {exc}"
        if ok:
            res.passed += 1
            continue
        res.failed += 1
        if res.counterexample is None:
            small = shrink(lw, case, ops, config.tol)
            res.counterexample = {
                "seed": f"{config.seed}:{lw.id}:{i}",
                "message": message,
                "case": case_to_json(small),
            }
    return res


def run_laws(config: LawConfig | None = None, ops: Ops = DEFAULT_OPS, **overrides) -> LawReport:
    """Run every registered law (or ``config.only``) and collect a report sorted by law id."""
    config = replace(config or LawConfig(), **overrides)
    ids = sorted(LAWS)
    if config.only:
        ids = [i for i in ids if any(i.startswith(o) for o in config.only)]
    return LawReport(config, [run_law(LAWS[i], config, ops) for i in ids])
