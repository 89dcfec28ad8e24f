"""Circuit documents: built-in gates, parsing, elaboration and per-step analysis.

A circuit is a JSON document::

    {"format": 1,
     "spaces":   {"B": {"bits": 1, "multiplicity": 2}, ...},
     "gates":    {"e": {"builtin": "erase", "multiplicity": 2}, ...},
     "context":  {"space": "B", "uniform": true},
     "pipeline": ["e", ["g1", "g2"], ...]}

Rationals are written as ``"a/b"`` strings and product labels as ``"(a,b)"``.
A list in the pipeline is a parallel block, combined left to right with the
Kronecker product.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence, Union

from .cdu import is_deterministic, is_total
from .entropy import (
    DEFAULT_TOL,
    EntropyLedger,
    PhysContext,
    _closed_target,
    is_conditionally_reversible,
    ledger,
)
from .errors import (
    GrcError,
    InvalidMultiplicity,
    NotClosedTransformation,
    NotDeterministic,
    ParseError,
    ShapeMismatch,
    UnknownGate,
)
from .partitioned import (
    PMatrix,
    PSet,
    aggregate,
    aggregate_dist,
    aggregate_pset,
    discrete_pset,
    expand_space,
    is_partitioned,
    lift,
    lift_dist,
    make_pset,
    microstate,
    pcompose,
    pkron,
    product_pset,
)
from .subdist import (
    ONE_Q,
    as_rational,
    format_label,
    format_rational,
    from_function,
    make_matrix,
    make_subdist,
    parse_label,
    structural,
    uniform,
)

FORMAT_VERSION = 1
BIT = ("0", "1")
Step = Union[str, tuple]

# -- built-in gates -----------------------------------------------------------------


def bit_pset(multiplicity: int = 1) -> PSet:
    return expand_space(BIT, multiplicity)


def bits_pset(n: int, multiplicity: int = 1) -> PSet:
    """Left-associated product of ``n`` encoded bits."""
    if n < 1:
        raise InvalidMultiplicity(f"need at least one bit, got {n}")
    out = bit_pset(multiplicity)
    for _ in range(n - 1):
        out = product_pset(out, bit_pset(multiplicity))
    return out


def _flatten(label, n: int) -> list:
    out = []
    for _ in range(n - 1):
        label, last = label
        out.append(last)
    out.append(label)
    return out[::-1]


def _nest(atoms: Sequence):
    acc = atoms[0]
    for a in atoms[1:]:
        acc = (acc, a)
    return acc


def _split_micro(atom: str) -> tuple[int, int]:
    bit, _, idx = atom.partition("#")
    return int(bit), int(idx or 0)


def _reversible(n: int, m: int, f: Callable[[tuple], tuple]) -> PMatrix:
    """Permutation of microstates that applies ``f`` to the bits and keeps every microstate index."""
    space = bits_pset(n, m)

    def act(label):
        parts = [_split_micro(a) for a in _flatten(label, n)]
        out = f(tuple(b for b, _ in parts))
        return _nest([microstate(str(b), i) for b, (_, i) in zip(out, parts)])

    return PMatrix(space, space, structural(space.elements, space.elements, act))


def _fredkin(bits):
    c, a, b = bits
    return (c, b, a) if c else bits


_REVERSIBLE = {
    "not": (1, lambda b: (1 - b[0],)),
    "cnot": (2, lambda b: (b[0], b[0] ^ b[1])),
    "toffoli": (3, lambda b: (b[0], b[1], b[2] ^ (b[0] & b[1]))),
    "fredkin": (3, _fredkin),
}

BUILTIN_GATES = ("id", "not", "cnot", "toffoli", "fredkin", "erase", "merge")


def builtin_gate(name: str, multiplicity: int = 1, bits: int = 1) -> PMatrix:
    """Physical encoding of a library gate with ``multiplicity`` microstates per bit value.

    ``erase`` is the Landauer construction: block ``0`` keeps its microstates
    and block ``1``'s microstates move to fresh microstates of ``0``, so the
    step is a bijection that merges two computational states. ``merge`` is the
    uniform lift of the same computational map and is not entropy-preserving.
    """
    if name not in BUILTIN_GATES:
        raise UnknownGate(f"unknown gate {name!r}; known gates: {', '.join(BUILTIN_GATES)}")
    if isinstance(multiplicity, bool) or not isinstance(multiplicity, int) or multiplicity < 1:
        raise InvalidMultiplicity(f"multiplicity must be an integer >= 1, got {multiplicity!r}")
    m = multiplicity
    if name == "id":
        if isinstance(bits, bool) or not isinstance(bits, int) or bits < 1:
            raise InvalidMultiplicity(f"id needs bits >= 1, got {bits!r}")
        return _reversible(bits, m, lambda b: b)
    if name in _REVERSIBLE:
        n, f = _REVERSIBLE[name]
        return _reversible(n, m, f)
    dom = bit_pset(m)
    if name == "erase":
        sink = [microstate("0", i) for i in range(2 * m)]
        cod = make_pset(sink, [sink])

        def move(x):
            b, i = _split_micro(x)
            return microstate("0", i + b * m)

        return PMatrix(dom, cod, structural(dom.elements, cod.elements, move))
    cod = expand_space(("0",), m)
    return lift(from_function(BIT, ("0",), lambda _: "0"), dom, cod)


# -- circuit specs ------------------------------------------------------------------


@dataclass(frozen=True)
class CircuitSpec:
    spaces: Mapping[str, PSet]
    gates: Mapping[str, PMatrix]
    context: PhysContext
    pipeline: tuple = ()
    context_space: str | None = field(default=None, compare=False)


def step_name(step: Step) -> str:
    return step if isinstance(step, str) else " || ".join(step)


def elaborate(spec: CircuitSpec) -> list[PMatrix]:
    """One PMatrix per pipeline step, checked to chain from the context."""
    out = []
    current = spec.context.pspace
    for i, step in enumerate(spec.pipeline):
        names = (step,) if isinstance(step, str) else tuple(step)
        try:
            gate = spec.gates[names[0]]
            for nm in names[1:]:
                gate = pkron(gate, spec.gates[nm])
        except KeyError as exc:
            raise ShapeMismatch(f"step {i}: unknown gate {exc.args[0]!r}") from None
        if gate.dom != current:
            raise ShapeMismatch(
                f"step {i} ({step_name(step)}): gate domain does not match the running space"
            )
        out.append(gate)
        current = gate.cod
    return out


def run(spec: CircuitSpec) -> PMatrix | None:
    """Sequential composite of the whole pipeline."""
    steps = elaborate(spec)
    if not steps:
        return None
    acc = steps[0]
    for g in steps[1:]:
        acc = pcompose(acc, g)
    return acc


# -- parsing ------------------------------------------------------------------------


def _fail(message: str, position: str):
    raise ParseError(message, position)


def _expect(value, kind, position: str, what: str):
    if not isinstance(value, kind):
        _fail(f"{what} must be {getattr(kind, '__name__', kind)}", position)
    return value


def _label(text, position: str):
    try:
        return parse_label(text)
    except ValueError as exc:
        _fail(str(exc), position)


def _rational(value, position: str):
    try:
        return as_rational(value)
    except (TypeError, ValueError) as exc:
        _fail(str(exc), position)


def _named(kind: str, name: str, exc: GrcError) -> GrcError:
    """Same error type, with the offending space or gate named."""
    if isinstance(exc, ParseError):
        return exc
    new = type(exc)(f"{kind} {name!r}: {exc}")
    new.__cause__ = exc
    return new


def _int_field(doc: Mapping, key: str, position: str, default=None) -> int:
    value = doc.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(f"{key!r} must be an integer", f"{position}.{key}")
    return value


def _parse_space(name: str, doc, spaces: Mapping[str, PSet], position: str) -> PSet:
    _expect(doc, dict, position, "a space")
    if "bits" in doc:
        return bits_pset(_int_field(doc, "bits", position), _int_field(doc, "multiplicity", position, 1))
    if "product" in doc:
        parts = _expect(doc["product"], list, f"{position}.product", "'product'")
        if len(parts) != 2 or not all(isinstance(p, str) for p in parts):
            _fail("'product' names exactly two spaces", f"{position}.product")
        for p in parts:
            if p not in spaces:
                _fail(f"unknown space {p!r} (spaces must be declared before use)", f"{position}.product")
        return product_pset(spaces[parts[0]], spaces[parts[1]])
    if "elements" not in doc:
        _fail("a space needs 'elements', 'product' or 'bits'", position)
    elems = _expect(doc["elements"], list, f"{position}.elements", "'elements'")
    elements = [_label(x, f"{position}.elements[{i}]") for i, x in enumerate(elems)]
    if "partition" not in doc:
        return discrete_pset(elements)
    blocks_doc = _expect(doc["partition"], list, f"{position}.partition", "'partition'")
    blocks = []
    for i, blk in enumerate(blocks_doc):
        _expect(blk, list, f"{position}.partition[{i}]", "a block")
        blocks.append([_label(x, f"{position}.partition[{i}]") for x in blk])
    return make_pset(elements, blocks)


def _space_ref(ref, spaces: Mapping[str, PSet], position: str) -> PSet:
    if not isinstance(ref, str) or ref not in spaces:
        _fail(f"unknown space {ref!r}", position)
    return spaces[ref]


def _parse_gate(doc, spaces: Mapping[str, PSet], position: str) -> PMatrix:
    _expect(doc, dict, position, "a gate")
    if "builtin" in doc:
        name = doc["builtin"]
        m = _int_field(doc, "multiplicity", position, 1)
        bits = _int_field(doc, "bits", position, 1)
        return builtin_gate(name, m, bits)
    dom = _space_ref(doc.get("dom"), spaces, f"{position}.dom")
    cod = _space_ref(doc.get("cod"), spaces, f"{position}.cod")
    if "map" in doc:
        mapping = _expect(doc["map"], dict, f"{position}.map", "'map'")
        rows = {
            _label(x, f"{position}.map"): {_label(y, f"{position}.map.{x}"): ONE_Q}
            for x, y in mapping.items()
        }
    elif "rows" in doc:
        rows_doc = _expect(doc["rows"], dict, f"{position}.rows", "'rows'")
        rows = {}
        for x, row in rows_doc.items():
            _expect(row, dict, f"{position}.rows.{x}", "a row")
            rows[_label(x, f"{position}.rows")] = {
                _label(y, f"{position}.rows.{x}"): _rational(v, f"{position}.rows.{x}.{y}")
                for y, v in row.items()
            }
    else:
        _fail("a gate needs 'builtin', 'map' or 'rows'", position)
    return PMatrix(dom, cod, make_matrix(dom.elements, cod.elements, rows))


def _parse_context(doc, spaces: Mapping[str, PSet]) -> tuple[PhysContext, str]:
    _expect(doc, dict, "context", "'context'")
    name = doc.get("space")
    pset = _space_ref(name, spaces, "context.space")
    if doc.get("uniform") is True:
        dist = uniform(pset.elements)
    elif "uniform_over" in doc:
        over = _expect(doc["uniform_over"], list, "context.uniform_over", "'uniform_over'")
        dist = uniform(pset.elements, [_label(x, "context.uniform_over") for x in over])
    elif "dist" in doc:
        entries = _expect(doc["dist"], dict, "context.dist", "'dist'")
        dist = make_subdist(
            pset.elements,
            {_label(x, "context.dist"): _rational(v, f"context.dist.{x}") for x, v in entries.items()},
        )
    else:
        _fail("a context needs 'dist', 'uniform' or 'uniform_over'", "context")
    return PhysContext(pset, dist), name


def _parse_pipeline(doc, gates: Mapping[str, PMatrix]) -> tuple:
    _expect(doc, list, "pipeline", "'pipeline'")
    out = []
    for i, step in enumerate(doc):
        names = [step] if isinstance(step, str) else step
        if not isinstance(names, list) or not names:
            _fail("a step is a gate name or a nonempty list of gate names", f"pipeline[{i}]")
        for nm in names:
            if not isinstance(nm, str) or nm not in gates:
                _fail(f"unknown gate {nm!r}", f"pipeline[{i}]")
        out.append(step if isinstance(step, str) else tuple(step))
    return tuple(out)


def loads(text: str) -> CircuitSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from None
    return from_document(doc)


def from_document(doc: Any) -> CircuitSpec:
    _expect(doc, dict, "$", "a circuit document")
    if doc.get("format") != FORMAT_VERSION:
        _fail(f"unsupported format {doc.get('format')!r}; expected {FORMAT_VERSION}", "format")
    unknown = set(doc) - {"format", "spaces", "gates", "context", "pipeline"}
    if unknown:
        _fail(f"unknown top-level keys {sorted(unknown)}", "$")
    spaces: dict = {}
    for name, sdoc in _expect(doc.get("spaces", {}), dict, "spaces", "'spaces'").items():
        try:
            spaces[name] = _parse_space(name, sdoc, spaces, f"spaces.{name}")
        except GrcError as exc:
            raise _named("space", name, exc) from None
    gates: dict = {}
    for name, gdoc in _expect(doc.get("gates", {}), dict, "gates", "'gates'").items():
        try:
            gates[name] = _parse_gate(gdoc, spaces, f"gates.{name}")
        except GrcError as exc:
            raise _named("gate", name, exc) from None
    if "context" not in doc:
        _fail("missing 'context'", "$")
    try:
        context, ctx_name = _parse_context(doc["context"], spaces)
    except GrcError as exc:
        where = doc["context"].get("space") if isinstance(doc["context"], dict) else None
        raise _named("context on space", str(where), exc) from None
    pipeline = _parse_pipeline(doc.get("pipeline", []), gates)
    spec = CircuitSpec(spaces, gates, context, pipeline, ctx_name)
    elaborate(spec)
    return spec


def parse_circuit(path: str | Path) -> CircuitSpec:
    return loads(Path(path).read_text(encoding="utf-8"))


# -- canonical serialization --------------------------------------------------------


def _pset_doc(p: PSet) -> dict:
    return {
        "elements": [format_label(x) for x in p.elements],
        "partition": [[format_label(x) for x in blk] for blk in p.blocks],
    }


def _space_names(spec: CircuitSpec) -> list[tuple[str, PSet]]:
    """Declared spaces plus a generated name for every gate space that has none."""
    named = list(spec.spaces.items())

    def find(p: PSet) -> str | None:
        return next((n for n, q in named if q == p), None)

    taken = {n for n, _ in named}
    for gname, g in spec.gates.items():
        for side, p in (("dom", g.dom), ("cod", g.cod)):
            if find(p) is None:
                base = name = f"{gname}.{side}"
                k = 1
                while name in taken:
                    k += 1
                    name = f"{base}{k}"
                named.append((name, p))
                taken.add(name)
    if find(spec.context.pspace) is None:
        named.append(("context", spec.context.pspace))
    return named


def to_document(spec: CircuitSpec) -> dict:
    named = _space_names(spec)

    def name_of(p: PSet, prefer: str | None = None) -> str:
        if prefer is not None and dict(named).get(prefer) == p:
            return prefer
        return next(n for n, q in named if q == p)

    gates = {}
    for gname, g in spec.gates.items():
        m = g.matrix
        gates[gname] = {
            "dom": name_of(g.dom),
            "cod": name_of(g.cod),
            "rows": {
                format_label(x): {format_label(y): format_rational(v) for y, v in m.rows[x].items()}
                for x in m.dom
                if m.rows[x].entries
            },
        }
    ctx = spec.context
    return {
        "format": FORMAT_VERSION,
        "spaces": {n: _pset_doc(p) for n, p in named},
        "gates": gates,
        "context": {
            "space": name_of(ctx.pspace, spec.context_space),
            "dist": {format_label(x): format_rational(v) for x, v in ctx.dist.items()},
        },
        "pipeline": [s if isinstance(s, str) else list(s) for s in spec.pipeline],
    }


def serialize(spec: CircuitSpec) -> str:
    return json.dumps(to_document(spec), indent=2, ensure_ascii=False) + "\n"


# -- aggregate and lift -------------------------------------------------------------


def aggregate_cmd(spec: CircuitSpec) -> CircuitSpec:
    """The computational circuit: every space collapsed to its blocks, every gate aggregated."""
    spaces = {n: aggregate_pset(p) for n, p in spec.spaces.items()}
    gates = {
        n: PMatrix(aggregate_pset(g.dom), aggregate_pset(g.cod), aggregate(g)) for n, g in spec.gates.items()
    }
    ctx = spec.context
    context = PhysContext(aggregate_pset(ctx.pspace), aggregate_dist(ctx.dist, ctx.pspace))
    return CircuitSpec(spaces, gates, context, spec.pipeline, spec.context_space)


def lift_cmd(spec: CircuitSpec, multiplicity: int | Mapping[str, int]) -> CircuitSpec:
    """Physical encoding of a computational circuit.

    ``multiplicity`` is one count for every space, or a mapping from space
    name to count (unnamed spaces and missing names get 1). Each gate is
    lifted by uniform spreading over the target block.
    """
    named = _space_names(spec)

    def mult(p: PSet) -> int:
        if isinstance(multiplicity, int):
            return multiplicity
        name = next(n for n, q in named if q == p)
        return multiplicity.get(name, 1)

    for n, p in named:
        if not p.is_discrete():
            raise ShapeMismatch(f"space {n!r}: lift expects a computational circuit with discrete partitions")
        m = mult(p)
        if isinstance(m, bool) or not isinstance(m, int) or m < 1:
            raise InvalidMultiplicity(f"space {n!r}: multiplicity must be an integer >= 1, got {m!r}")

    def expand(p: PSet) -> PSet:
        return expand_space(p.elements, mult(p))

    spaces = {n: expand(p) for n, p in spec.spaces.items()}
    gates = {n: lift(g.matrix, expand(g.dom), expand(g.cod)) for n, g in spec.gates.items()}
    ctx = spec.context
    big = expand(ctx.pspace)
    context = PhysContext(big, lift_dist(ctx.dist, big))
    return CircuitSpec(spaces, gates, context, spec.pipeline, spec.context_space)


# -- analysis -----------------------------------------------------------------------


@dataclass(frozen=True)
class StepFlags:
    partitioned: bool
    total: bool
    deterministic_aggregate: bool
    nee: bool
    condrev: bool | None
    free_phy: bool
    free_comp: bool | None
    fundamental_agree: bool | None

    def to_json(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class StepReport:
    index: int
    gate: str
    before: EntropyLedger
    after: EntropyLedger
    flags: StepFlags
    delta_h_nc: float

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "gate": self.gate,
            "before": self.before.to_json(),
            "after": self.after.to_json(),
            "flags": self.flags.to_json(),
            "delta_h_nc": float(f"{self.delta_h_nc:.12g}") + 0.0,
        }


@dataclass(frozen=True)
class Analysis:
    steps: tuple
    initial: EntropyLedger
    final: EntropyLedger
    total_delta_h_nc: float
    ejecting_steps: int
    all_free: bool

    @property
    def exit_code(self) -> int:
        return 1 if self.ejecting_steps else 0

    def to_json(self) -> dict:
        return {
            "steps": [s.to_json() for s in self.steps],
            "summary": {
                "initial": self.initial.to_json(),
                "final": self.final.to_json(),
                "total_delta_h_nc": float(f"{self.total_delta_h_nc:.12g}") + 0.0,
                "ejecting_steps": self.ejecting_steps,
                "all_free": self.all_free,
            },
        }

    def to_text(self) -> str:
        def mark(v):
            return "n/a" if v is None else ("yes" if v else "no")

        lines = []
        for s in self.steps:
            f = s.flags
            lines.append(
                f"step {s.index} {s.gate}: h_nc {s.before.h_nc:.6f} -> {s.after.h_nc:.6f} "
                f"(delta {s.delta_h_nc:+.6f}) nee={mark(f.nee)} condrev={mark(f.condrev)} "
                f"free_phy={mark(f.free_phy)} agree={mark(f.fundamental_agree)}"
            )
        lines.append(
            f"total delta h_nc {self.total_delta_h_nc:+.6f} bits; "
            f"{self.ejecting_steps} ejecting step(s); all free: {mark(self.all_free)}"
        )
        return "\n".join(lines) + "\n"


def analyze(spec: CircuitSpec, tol: float = DEFAULT_TOL, base: float = 2.0, lenient: bool = False) -> Analysis:
    """Run the pipeline from the context and report ledgers and verdicts per step."""
    ctx = spec.context
    initial = ledger(ctx, base)
    before = initial
    reports = []
    for i, (step, gate) in enumerate(zip(spec.pipeline, elaborate(spec))):
        name = step_name(step)
        try:
            nxt = _closed_target(gate, ctx, tol, base)
        except NotClosedTransformation as exc:
            raise NotClosedTransformation(f"step {i} ({name}): {exc}") from None
        after = ledger(nxt, base)
        qm = aggregate(gate)
        det = is_deterministic(qm)
        nee = before.h_comp <= after.h_comp + tol
        if det:
            condrev = is_conditionally_reversible(qm, aggregate_dist(ctx.dist, ctx.pspace))
        elif lenient:
            condrev = None
        else:
            raise NotDeterministic(
                f"step {i} ({name}): aggregate is not deterministic, so conditional reversibility "
                "is undefined (use --lenient to report it as n/a)"
            )
        flags = StepFlags(
            partitioned=is_partitioned(gate.matrix, gate.dom, gate.cod),
            total=is_total(gate.matrix),
            deterministic_aggregate=det,
            nee=nee,
            condrev=condrev,
            free_phy=nee and det,
            free_comp=condrev,
            fundamental_agree=(nee == condrev) if det else None,
        )
        reports.append(StepReport(i, name, before, after, flags, after.h_nc - before.h_nc))
        ctx, before = nxt, after
    return Analysis(
        steps=tuple(reports),
        initial=initial,
        final=before,
        total_delta_h_nc=before.h_nc - initial.h_nc,
        ejecting_steps=sum(1 for r in reports if not r.flags.nee),
        all_free=all(r.flags.free_phy for r in reports),
    )
