"""Partitioned sets, partitioned matrices, aggregation and lifting.

Elements of a :class:`PSet` are physical microstates; its blocks are the
computational states. Each block is named by its least member under
:func:`grc.subdist.label_key`, and blocks of a product are named by the pair
of block names. With that naming, aggregation commutes with the Kronecker
product as an exact equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import NotAPartition, NotPartitioned, ShapeMismatch
from .subdist import (
    ZERO,
    Label,
    Matrix,
    Space,
    Subdist,
    _subdist_unchecked,
    compose,
    identity,
    kron,
    label_key,
    make_space,
    matrix_unchecked,
    product_space,
)


@dataclass(frozen=True, eq=False)
class PSet:
    elements: Space
    block_of: Mapping[Label, Label]
    blocks: tuple = field(repr=False)
    """Block member tuples, ordered by first appearance in ``elements``."""

    @property
    def labels(self) -> Space:
        return tuple(self.block_of[b[0]] for b in self.blocks)

    @cached_property
    def members(self) -> Mapping[Label, tuple]:
        """Block name to its member tuple."""
        return MappingProxyType({self.block_of[b[0]]: b for b in self.blocks})

    def block(self, x: Label) -> tuple:
        return self.members[self.block_of[x]]

    def is_discrete(self) -> bool:
        return len(self.blocks) == len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PSet):
            return NotImplemented
        return self.elements == other.elements and dict(self.block_of) == dict(other.block_of)

    def __hash__(self) -> int:
        return hash((self.elements, tuple(self.block_of[x] for x in self.elements)))

    def __repr__(self) -> str:
        return f"PSet({[list(b) for b in self.blocks]!r})"


def _pset_from_assignment(elements: Space, block_of: dict) -> PSet:
    grouped: dict = {}
    for x in elements:
        grouped.setdefault(block_of[x], []).append(x)
    return PSet(elements, MappingProxyType(block_of), tuple(tuple(v) for v in grouped.values()))


def make_pset(elements: Iterable[Label], blocks: Sequence[Sequence[Label]]) -> PSet:
    elements = make_space(elements)
    present = set(elements)
    owner: dict = {}
    for i, blk in enumerate(blocks):
        if not blk:
            raise NotAPartition(f"block {i} is empty")
        for x in blk:
            if x not in present:
                raise NotAPartition(f"block {i} names unknown label {x!r}")
            if x in owner:
                raise NotAPartition(f"label {x!r} appears in blocks {owner[x]} and {i}")
            owner[x] = i
    missing = [x for x in elements if x not in owner]
    if missing:
        raise NotAPartition(f"labels not covered by any block: {missing!r}")
    names = [min(blk, key=label_key) for blk in blocks]
    return _pset_from_assignment(elements, {x: names[owner[x]] for x in elements})


def discrete_pset(elements: Iterable[Label]) -> PSet:
    elements = make_space(elements)
    return _pset_from_assignment(elements, {x: x for x in elements})


def indiscrete_pset(elements: Iterable[Label]) -> PSet:
    elements = make_space(elements)
    return make_pset(elements, [list(elements)])


def product_pset(p: PSet, q: PSet) -> PSet:
    elements = product_space(p.elements, q.elements)
    return _pset_from_assignment(
        elements, {(x, u): (p.block_of[x], q.block_of[u]) for x, u in elements}
    )


ONE_PSET = discrete_pset(("*",))


def aggregate_set(p: PSet) -> Space:
    return p.labels


def aggregate_pset(p: PSet) -> PSet:
    return discrete_pset(p.labels)


def aggregate_dist(p: Subdist, pset: PSet) -> Subdist:
    if p.space != pset.elements:
        raise ShapeMismatch("distribution space differs from the partitioned set")
    acc: dict = {}
    for x, v in p.items():
        b = pset.block_of[x]
        acc[b] = acc.get(b, ZERO) + v
    return _subdist_unchecked(pset.labels, acc)


def dist_equiv(p: Subdist, q: Subdist, pset: PSet) -> bool:
    return aggregate_dist(p, pset) == aggregate_dist(q, pset)


def _block_profile(row: Subdist, cod: PSet) -> dict:
    acc: dict = {}
    for y, v in row.items():
        b = cod.block_of[y]
        acc[b] = acc.get(b, ZERO) + v
    return acc


def _check_shape(m: Matrix, dom: PSet, cod: PSet) -> None:
    if m.dom != dom.elements or m.cod != cod.elements:
        raise ShapeMismatch("matrix shape does not match the partitioned sets")


def partition_violation(m: Matrix, dom: PSet, cod: PSet) -> tuple | None:
    """First ``(x, x2, block)`` with ``x ~ x2`` but different mass into ``block``."""
    _check_shape(m, dom, cod)
    for blk in dom.blocks:
        ref = blk[0]
        ref_profile = _block_profile(m.rows[ref], cod)
        for x in blk[1:]:
            prof = _block_profile(m.rows[x], cod)
            if prof != ref_profile:
                bad = next(
                    b for b in cod.labels if prof.get(b, ZERO) != ref_profile.get(b, ZERO)
                )
                return ref, x, bad
    return None


def is_partitioned(m: Matrix, dom: PSet, cod: PSet) -> bool:
    return partition_violation(m, dom, cod) is None


@dataclass(frozen=True)
class PMatrix:
    dom: PSet
    cod: PSet
    matrix: Matrix

    def __post_init__(self):
        bad = partition_violation(self.matrix, self.dom, self.cod)
        if bad is not None:
            x, x2, b = bad
            raise NotPartitioned(
                f"rows {x!r} and {x2!r} are equivalent but send different mass into block {b!r}"
            )


def make_pmatrix(m: Matrix, dom: PSet, cod: PSet) -> PMatrix:
    return PMatrix(dom, cod, m)


def pidentity(p: PSet) -> PMatrix:
    return PMatrix(p, p, identity(p.elements))


def pcompose(m: PMatrix, n: PMatrix) -> PMatrix:
    if m.cod != n.dom:
        raise ShapeMismatch("cannot compose: partitioned sets differ")
    return PMatrix(m.dom, n.cod, compose(m.matrix, n.matrix))


def pkron(m: PMatrix, n: PMatrix) -> PMatrix:
    return PMatrix(product_pset(m.dom, n.dom), product_pset(m.cod, n.cod), kron(m.matrix, n.matrix))


def pmatrix_equiv(m: PMatrix, n: PMatrix) -> bool:
    """Rowwise block-sum agreement; unit rows span every subdistribution by linearity."""
    if m.dom != n.dom or m.cod != n.cod:
        raise ShapeMismatch("equivalence needs matrices of the same partitioned shape")
    return all(
        _block_profile(m.matrix.rows[x], m.cod) == _block_profile(n.matrix.rows[x], n.cod)
        for x in m.dom.elements
    )


def aggregate(m: PMatrix) -> Matrix:
    """Collapse to blocks: entry ``([x],[y])`` is the mass row ``x`` puts into block ``[y]``."""
    rows = {m.dom.block_of[blk[0]]: _block_profile(m.matrix.rows[blk[0]], m.cod) for blk in m.dom.blocks}
    return matrix_unchecked(m.dom.labels, m.cod.labels, rows)


def lift(mbar: Matrix, dom: PSet, cod: PSet) -> PMatrix:
    """Spread each block entry uniformly over the target block's microstates."""
    if mbar.dom != dom.labels or mbar.cod != cod.labels:
        raise ShapeMismatch("matrix shape does not match the block labels of the partitioned sets")
    members = cod.members
    rows = {}
    for x in dom.elements:
        acc = {}
        for yb, v in mbar.rows[dom.block_of[x]].items():
            share = v / len(members[yb])
            for y in members[yb]:
                acc[y] = share
        rows[x] = acc
    return PMatrix(dom, cod, matrix_unchecked(dom.elements, cod.elements, rows))


def lift_dist(pbar: Subdist, pset: PSet) -> Subdist:
    """Uniform spread of a block distribution over the microstates of each block."""
    if pbar.space != pset.labels:
        raise ShapeMismatch("distribution space differs from the block labels")
    acc = {}
    for blk in pset.blocks:
        v = pbar[pset.block_of[blk[0]]]
        if v:
            share = v / len(blk)
            for x in blk:
                acc[x] = share
    return _subdist_unchecked(pset.elements, acc)


# -- microstate naming used by the built-in encodings -------------------------------


def microstate(label: Label, index: int) -> Label:
    """Name of the ``index``-th microstate of computational state ``label``.

    Index 0 reuses ``label`` itself, and every other name sorts after it, so
    the block name of the expanded state is the original label.
    """
    if index == 0:
        return label
    if isinstance(label, tuple):
        return (microstate(label[0], index), label[1])
    return f"{label}#{index}"


def _product_factors(space: Space) -> tuple[Space, Space] | None:
    if not space or not all(isinstance(x, tuple) and len(x) == 2 for x in space):
        return None
    left = tuple(dict.fromkeys(x[0] for x in space))
    right = tuple(dict.fromkeys(x[1] for x in space))
    if product_space(left, right) != space:
        return None
    return left, right


def expand_space(space: Space, multiplicity: int) -> PSet:
    """Physical encoding with ``multiplicity`` microstates per atomic state.

    Full product spaces expand factorwise, so expanding ``A×B`` gives the
    product of the expansions and parallel composition still lines up.
    """
    factors = _product_factors(space)
    if factors is not None:
        return product_pset(expand_space(factors[0], multiplicity), expand_space(factors[1], multiplicity))
    blocks = [[microstate(s, i) for i in range(multiplicity)] for s in space]
    return make_pset([x for b in blocks for x in b], blocks)
