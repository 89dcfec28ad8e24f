"""Copy/discard structure on substochastic matrices and the predicates it induces.

The predicates use row-level characterisations, which are linear in the
number of nonzero entries. The equational definitions (copy naturality,
discard naturality, ``f = dom(f) f``) are checked against these in the
test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import NotSubpermutation, ShapeMismatch
from .subdist import (
    ONE,
    ONE_Q,
    UNIT_LABEL,
    Label,
    Matrix,
    Space,
    compose,
    make_space,
    matrix_unchecked,
    product_space,
    structural,
    transpose,
)


def copy_matrix(space: Iterable[Label]) -> Matrix:
    """Shape ``(X, X×X)``; row ``x`` is the unit on ``(x, x)``."""
    space = make_space(space)
    return matrix_unchecked(space, product_space(space, space), {x: {(x, x): ONE_Q} for x in space})


def discard_matrix(space: Iterable[Label]) -> Matrix:
    space = make_space(space)
    return matrix_unchecked(space, ONE, {x: {UNIT_LABEL: ONE_Q} for x in space})


def left_unitor(space: Space) -> Matrix:
    """``1×X → X``."""
    return structural(product_space(ONE, space), space, lambda p: p[1])


def right_unitor(space: Space) -> Matrix:
    """``X×1 → X``."""
    return structural(product_space(space, ONE), space, lambda p: p[0])


def associator(a: Space, b: Space, c: Space) -> Matrix:
    """``(A×B)×C → A×(B×C)``."""
    return structural(
        product_space(product_space(a, b), c),
        product_space(a, product_space(b, c)),
        lambda t: (t[0][0], (t[0][1], t[1])),
    )


def dom_matrix(m: Matrix) -> Matrix:
    """Diagonal matrix on the domain carrying each row's mass."""
    return matrix_unchecked(m.dom, m.dom, {x: {x: m.rows[x].mass} for x in m.dom})


def is_deterministic(m: Matrix) -> bool:
    return all(r.is_zero() or r.unit_target() is not None for r in m.rows.values())


def is_total(m: Matrix) -> bool:
    return all(r.mass == 1 for r in m.rows.values())


def is_quasi_total(m: Matrix) -> bool:
    return all(r.is_zero() or r.mass == 1 for r in m.rows.values())


def is_subpermutation(m: Matrix) -> bool:
    seen = set()
    for r in m.rows.values():
        if r.is_zero():
            continue
        y = r.unit_target()
        if y is None or y in seen:
            return False
        seen.add(y)
    return True


def partial_inverse(m: Matrix) -> Matrix:
    """The transpose of a subpermutation matrix, its canonical partial inverse."""
    if not is_subpermutation(m):
        raise NotSubpermutation("matrix is not a subpermutation; it has no partial inverse")
    return transpose(m)


@dataclass(frozen=True)
class PartialIsoWitness:
    forward: Matrix
    reverse: Matrix


def verify_partial_iso(w: PartialIsoWitness) -> bool:
    """Check ``f f^r = dom(f)`` and ``f^r f = dom(f^r)`` exactly."""
    f, r = w.forward, w.reverse
    if f.cod != r.dom or r.cod != f.dom:
        raise ShapeMismatch("reverse must have the transposed shape of forward")
    return compose(f, r) == dom_matrix(f) and compose(r, f) == dom_matrix(r)
