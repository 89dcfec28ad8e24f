"""Exact subdistributions and substochastic matrices over finite labelled spaces.

A *space* is a tuple of pairwise distinct labels. Labels are opaque strings,
or pairs of labels for product spaces. Every probability is a
:class:`fractions.Fraction`; nothing here ever rounds.

Matrices are stored as sparse rows: ``rows[x]`` is the subdistribution
``M[x, -]`` over the codomain. Zero rows are allowed and model partial maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType
from typing import Any, Callable, Hashable, Iterable, Iterator, Mapping, Sequence, Union

from .errors import (
    DuplicateLabel,
    KeyOutsideSpace,
    MassExceedsOne,
    NegativeEntry,
    NotColumnSubstochastic,
    ShapeMismatch,
)

Label = Hashable
Space = tuple
RationalLike = Union[int, Fraction, str]

ZERO = Fraction(0)
ONE_Q = Fraction(1)
UNIT_LABEL = "*"
#: The one-point space, monoidal unit of the Kronecker product.
ONE: Space = (UNIT_LABEL,)


def as_rational(value: Any) -> Fraction:
    """Coerce ints, Fractions and ``"a/b"`` strings to a Fraction.

    Floats are refused: they would smuggle rounding into exact predicates.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def format_rational(value: Fraction) -> str:
    return str(value)


def make_space(labels: Iterable[Label]) -> Space:
    space = tuple(labels)
    if len(set(space)) != len(space):
        seen: set = set()
        dupes = [x for x in space if x in seen or seen.add(x)]
        raise DuplicateLabel(f"duplicate labels in space: {dupes!r}")
    return space


@lru_cache(maxsize=8192)
def space_index(space: Space) -> Mapping[Label, int]:
    return MappingProxyType({x: i for i, x in enumerate(space)})


@lru_cache(maxsize=2048)
def product_space(left: Space, right: Space) -> Space:
    """Cartesian product, ordered lexicographically by (left, right) position."""
    return tuple((x, u) for x in left for u in right)


def label_key(label: Label):
    """Total order on labels: atoms before pairs, atoms by text, pairs componentwise."""
    if isinstance(label, tuple):
        return (1, tuple(label_key(c) for c in label))
    return (0, str(label))


def _ordered(space: Space, acc: Mapping[Label, Fraction]) -> dict:
    idx = space_index(space)
    return {k: acc[k] for k in sorted((k for k, v in acc.items() if v), key=idx.__getitem__)}


@dataclass(frozen=True, eq=False)
class Subdist:
    """A finitely supported weight function with total mass at most one."""

    space: Space
    entries: Mapping[Label, Fraction]

    def __getitem__(self, x: Label) -> Fraction:
        return self.entries.get(x, ZERO)

    def __iter__(self) -> Iterator[Label]:
        return iter(self.entries)

    def items(self):
        return self.entries.items()

    @property
    def mass(self) -> Fraction:
        return sum(self.entries.values(), ZERO)

    @property
    def support(self) -> frozenset:
        return frozenset(self.entries)

    def is_zero(self) -> bool:
        return not self.entries

    def is_distribution(self) -> bool:
        return self.mass == 1

    def unit_target(self) -> Label | None:
        """The label ``y`` when this is exactly the unit distribution on ``y``."""
        if len(self.entries) == 1:
            ((y, v),) = self.entries.items()
            if v == 1:
                return y
        return None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subdist):
            return NotImplemented
        return self.space == other.space and dict(self.entries) == dict(other.entries)

    def __hash__(self) -> int:
        return hash((self.space, frozenset(self.entries.items())))

    def __repr__(self) -> str:
        body = ", ".join(f"{x!r}: {v}" for x, v in self.entries.items())
        return f"Subdist({{{body}}})"


def _subdist_unchecked(space: Space, acc: Mapping[Label, Fraction]) -> Subdist:
    return Subdist(space, MappingProxyType(_ordered(space, acc)))


def make_subdist(space: Iterable[Label], entries: Mapping[Label, RationalLike]) -> Subdist:
    space = make_space(space)
    idx = space_index(space)
    acc: dict = {}
    for x, raw in entries.items():
        if x not in idx:
            raise KeyOutsideSpace(f"label {x!r} is not in the space")
        v = as_rational(raw)
        if v < 0:
            raise NegativeEntry(f"entry {x!r} is negative: {v}")
        if v:
            acc[x] = v
    total = sum(acc.values(), ZERO)
    if total > 1:
        raise MassExceedsOne(f"total mass {total} exceeds 1")
    return _subdist_unchecked(space, acc)


def unit(space: Iterable[Label], x: Label) -> Subdist:
    space = space if isinstance(space, tuple) else make_space(space)
    if x not in space_index(space):
        raise KeyOutsideSpace(f"label {x!r} is not in the space")
    return Subdist(space, MappingProxyType({x: ONE_Q}))


def zero(space: Iterable[Label]) -> Subdist:
    space = space if isinstance(space, tuple) else make_space(space)
    return Subdist(space, MappingProxyType({}))


def uniform(space: Iterable[Label], over: Iterable[Label] | None = None) -> Subdist:
    space = space if isinstance(space, tuple) else make_space(space)
    chosen = list(space if over is None else over)
    if not chosen:
        return zero(space)
    w = Fraction(1, len(chosen))
    return make_subdist(space, {x: w for x in chosen})


def mass(p: Subdist) -> Fraction:
    return p.mass


def support_dist(p: Subdist) -> frozenset:
    return p.support


def tensor_dist(p: Subdist, q: Subdist) -> Subdist:
    """``(p ⊗ q)(x, u) = p(x) q(u)`` on the product space."""
    acc = {(x, u): a * b for x, a in p.items() for u, b in q.items()}
    return _subdist_unchecked(product_space(p.space, q.space), acc)


@dataclass(frozen=True, eq=False)
class Matrix:
    """Substochastic matrix of shape ``(dom, cod)`` stored row by row."""

    dom: Space
    cod: Space
    rows: Mapping[Label, Subdist]

    def row(self, x: Label) -> Subdist:
        try:
            return self.rows[x]
        except KeyError:
            raise KeyOutsideSpace(f"label {x!r} is not in the domain") from None

    def __getitem__(self, key: tuple) -> Fraction:
        x, y = key
        return self.row(x)[y]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.dom), len(self.cod)

    def nonzero(self) -> Iterator[tuple[Label, Label, Fraction]]:
        for x in self.dom:
            for y, v in self.rows[x].items():
                yield x, y, v

    def column_masses(self) -> dict:
        acc: dict = {}
        for _, y, v in self.nonzero():
            acc[y] = acc.get(y, ZERO) + v
        return acc

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return (
            self.dom == other.dom
            and self.cod == other.cod
            and all(self.rows[x] == other.rows[x] for x in self.dom)
        )

    def __hash__(self) -> int:
        return hash((self.dom, self.cod, tuple(self.rows[x] for x in self.dom)))

    def __repr__(self) -> str:
        rows = "; ".join(f"{x!r}->{dict(self.rows[x].entries)}" for x in self.dom)
        return f"Matrix({len(self.dom)}x{len(self.cod)}: {rows})"


def _check_space(space: Iterable[Label], what: str) -> Space:
    space = make_space(space)
    if not space:
        raise ShapeMismatch(f"{what} space must be nonempty")
    return space


def matrix_unchecked(dom: Space, cod: Space, rows: Mapping[Label, Mapping[Label, Fraction]]) -> Matrix:
    """Build a Matrix without validating row masses.

    Only for callers that construct rows which are substochastic by
    construction (products, sums of existing rows).
    """
    return Matrix(
        dom,
        cod,
        MappingProxyType({x: _subdist_unchecked(cod, rows.get(x, {})) for x in dom}),
    )


def make_matrix(
    dom: Iterable[Label],
    cod: Iterable[Label],
    rows: Mapping[Label, Mapping[Label, RationalLike] | Subdist],
) -> Matrix:
    dom = _check_space(dom, "domain")
    cod = _check_space(cod, "codomain")
    didx = space_index(dom)
    for x in rows:
        if x not in didx:
            raise KeyOutsideSpace(f"row label {x!r} is not in the domain")
    built = {}
    for x in dom:
        r = rows.get(x, {})
        if isinstance(r, Subdist):
            if r.space != cod:
                raise ShapeMismatch(f"row {x!r} is not over the codomain")
            built[x] = r
        else:
            try:
                built[x] = make_subdist(cod, r)
            except MassExceedsOne as exc:
                raise MassExceedsOne(f"row {x!r}: {exc}") from None
    return Matrix(dom, cod, MappingProxyType(built))


def from_function(dom: Iterable[Label], cod: Iterable[Label], f: Mapping[Label, Label] | Callable) -> Matrix:
    """Deterministic matrix: row ``x`` is the unit on ``f(x)``; unmapped rows are zero."""
    dom = _check_space(dom, "domain")
    cod = _check_space(cod, "codomain")
    cidx = space_index(cod)
    rows = {}
    for x in dom:
        y = f.get(x) if isinstance(f, Mapping) else f(x)
        if y is None:
            continue
        if y not in cidx:
            raise KeyOutsideSpace(f"image {y!r} of {x!r} is not in the codomain")
        rows[x] = {y: ONE_Q}
    return matrix_unchecked(dom, cod, rows)


def identity(space: Iterable[Label]) -> Matrix:
    space = _check_space(space, "identity")
    return matrix_unchecked(space, space, {x: {x: ONE_Q} for x in space})


def zero_matrix(dom: Iterable[Label], cod: Iterable[Label]) -> Matrix:
    return matrix_unchecked(_check_space(dom, "domain"), _check_space(cod, "codomain"), {})


def compose(m: Matrix, n: Matrix) -> Matrix:
    """Matrix product ``MN``: first ``m``, then ``n``."""
    if m.cod != n.dom:
        raise ShapeMismatch(
            f"cannot compose: codomain of size {len(m.cod)} differs from domain of size {len(n.dom)}"
        )
    rows = {}
    for x in m.dom:
        acc: dict = {}
        for y, a in m.rows[x].items():
            for z, b in n.rows[y].items():
                acc[z] = acc.get(z, ZERO) + a * b
        rows[x] = acc
    return matrix_unchecked(m.dom, n.cod, rows)


def compose_all(first: Matrix, *rest: Matrix) -> Matrix:
    out = first
    for m in rest:
        out = compose(out, m)
    return out


def kron(m: Matrix, n: Matrix) -> Matrix:
    """Kronecker product on pair-labelled product spaces."""
    rows = {}
    for x in m.dom:
        mr = m.rows[x]
        for u in n.dom:
            nr = n.rows[u]
            rows[(x, u)] = {(y, v): a * b for y, a in mr.items() for v, b in nr.items()}
    return matrix_unchecked(product_space(m.dom, n.dom), product_space(m.cod, n.cod), rows)


def transpose(m: Matrix) -> Matrix:
    cols = m.column_masses()
    bad = [y for y, s in cols.items() if s > 1]
    if bad:
        y = min(bad, key=space_index(m.cod).__getitem__)
        raise NotColumnSubstochastic(f"column {y!r} has mass {cols[y]} > 1")
    return transpose_unchecked(m)


def transpose_unchecked(m: Matrix) -> Matrix:
    rows: dict = {y: {} for y in m.cod}
    for x, y, v in m.nonzero():
        rows[y][x] = v
    return matrix_unchecked(m.cod, m.dom, rows)


def apply(p: Subdist, m: Matrix) -> Subdist:
    """Push ``p`` through ``m``: ``(pM)_y = Σ_x p_x M_{x,y}``."""
    if p.space != m.dom:
        raise ShapeMismatch("distribution space differs from matrix domain")
    acc: dict = {}
    for x, a in p.items():
        for y, b in m.rows[x].items():
            acc[y] = acc.get(y, ZERO) + a * b
    return _subdist_unchecked(m.cod, acc)


def support_matrix(m: Matrix) -> frozenset:
    return frozenset(x for x in m.dom if m.rows[x].entries)


def restrict_rows(m: Matrix, keep: Iterable[Label]) -> Matrix:
    """Submatrix on the domain labels in ``keep`` (domain order preserved)."""
    keep = set(keep)
    for x in keep:
        if x not in space_index(m.dom):
            raise KeyOutsideSpace(f"label {x!r} is not in the domain")
    dom = tuple(x for x in m.dom if x in keep)
    return Matrix(dom, m.cod, MappingProxyType({x: m.rows[x] for x in dom}))


def structural(dom: Space, cod: Space, f: Callable[[Label], Label]) -> Matrix:
    """Deterministic total matrix induced by a label map, used for swaps and unitors."""
    return from_function(dom, cod, f)


def swap_matrix(left: Space, right: Space) -> Matrix:
    return structural(product_space(left, right), product_space(right, left), lambda xu: (xu[1], xu[0]))


# -- label and matrix text encoding --------------------------------------------------

_RESERVED = set("(),")


def format_label(label: Label) -> str:
    if isinstance(label, tuple):
        if len(label) != 2:
            raise ValueError(f"product labels are pairs, got {label!r}")
        return f"({format_label(label[0])},{format_label(label[1])})"
    text = str(label)
    if not text or _RESERVED & set(text) or text != text.strip():
        raise ValueError(f"atomic label {text!r} is empty or uses reserved characters")
    return text


def parse_label(text: str) -> Label:
    def parse(i: int) -> tuple[Label, int]:
        if text.startswith("(", i):
            a, i = parse(i + 1)
            if not text.startswith(",", i):
                raise ValueError(f"expected ',' at offset {i} in label {text!r}")
            b, i = parse(i + 1)
            if not text.startswith(")", i):
                raise ValueError(f"expected ')' at offset {i} in label {text!r}")
            return (a, b), i + 1
        j = i
        while j < len(text) and text[j] not in _RESERVED:
            j += 1
        if j == i:
            raise ValueError(f"empty atom at offset {i} in label {text!r}")
        return text[i:j], j

    if not isinstance(text, str):
        raise ValueError(f"labels must be text, got {text!r}")
    label, end = parse(0)
    if end != len(text):
        raise ValueError(f"trailing characters in label {text!r}")
    return label


def subdist_to_json(p: Subdist) -> dict:
    return {format_label(x): format_rational(v) for x, v in p.items()}


def matrix_to_json(m: Matrix) -> dict:
    return {
        "dom": [format_label(x) for x in m.dom],
        "cod": [format_label(y) for y in m.cod],
        "rows": {format_label(x): subdist_to_json(m.rows[x]) for x in m.dom if m.rows[x].entries},
    }


def matrix_from_json(doc: Mapping) -> Matrix:
    dom = [parse_label(s) for s in doc["dom"]]
    cod = [parse_label(s) for s in doc["cod"]]
    rows = {
        parse_label(x): {parse_label(y): as_rational(v) for y, v in r.items()}
        for x, r in doc.get("rows", {}).items()
    }
    return make_matrix(dom, cod, rows)


def labels_of(seq: Sequence[Label]) -> list[str]:
    return [format_label(x) for x in seq]
