"""Acceptance criteria, each run at its stated size and tolerance.

Every test records one PASS/FAIL line; the lines are repeated in the pytest
terminal summary. Two literal statements are known to be false and are kept
as strict expected failures next to their corrected forms.
"""

import random
import time

import mpmath
import pytest

from grc import gen
from grc.cdu import (
    associator,
    copy_matrix,
    discard_matrix,
    is_deterministic,
    is_quasi_total,
    is_subpermutation,
    is_total,
    left_unitor,
    right_unitor,
)
from grc.circuit import CircuitSpec, analyze, bit_pset, builtin_gate
from grc.entropy import PhysContext, entropy, is_conditionally_reversible, is_non_entropy_ejecting, push
from grc.laws import (
    entropy_nonincreasing,
    entropy_preserving_on_support,
    g_closed_chain,
    g_closed_par,
    partial_iso_via_transpose,
)
from grc.partitioned import (
    PMatrix,
    aggregate,
    aggregate_dist,
    discrete_pset,
    expand_space,
    is_partitioned,
    lift,
    make_pset,
    product_pset,
)
from grc.subdist import ONE, apply, compose, identity, kron, product_space, structural, swap_matrix, tensor_dist, uniform

TOL = 1e-9
CASES = 500


def rng_for(criterion, i):
    return random.Random(f"acceptance:{criterion}:{i}")


def dims(rng, hi=6):
    return rng.randint(1, hi)


def h_exact(p):
    """Entropy in bits at 50 digits, from the exact rationals."""
    with mpmath.workdps(50):
        return -sum(mpmath.mpf(v.numerator) / v.denominator * mpmath.log(mpmath.mpf(v.numerator) / v.denominator, 2) for _, v in p.items())


# -- 1 ----------------------------------------------------------------------------


def test_landauer_ledger(acceptance_log):
    start = time.perf_counter()
    erase = builtin_gate("erase", 2)
    bit = bit_pset(2)
    results = []
    for over in (None, ("0", "0#1")):
        ctx = PhysContext(bit, uniform(bit.elements, over))
        (step,) = analyze(CircuitSpec({}, {"erase": erase}, ctx, ("erase",))).steps
        results.append(step)
    elapsed = time.perf_counter() - start
    full, block0 = results
    ok = (
        abs(full.delta_h_nc - 1.0) <= TOL
        and (full.flags.nee, full.flags.condrev, full.flags.fundamental_agree) == (False, False, True)
        and abs(block0.delta_h_nc) <= TOL
        and (block0.flags.nee, block0.flags.condrev, block0.flags.fundamental_agree) == (True, True, True)
        and elapsed < 1.0
    )
    acceptance_log(
        ok,
        f"1 Landauer ledger: uniform dh_nc={full.delta_h_nc:+.12f}, block-0 dh_nc={block0.delta_h_nc:+.12f}, {elapsed:.3f}s",
    )
    assert ok


# -- 2 ----------------------------------------------------------------------------


def test_fundamental_theorem_fuzz(acceptance_log):
    start = time.perf_counter()
    bad, outcomes = [], {True: 0, False: 0}
    for i in range(1000):
        rng = rng_for("fundamental", i)
        m, p = gen.closed_instance(rng, 6, injective=rng.choice((None, None, True, False)))
        assert max(len(m.dom.elements), len(m.cod.elements)) <= 6
        assert all(v.denominator <= 64 for _, v in p.dist.items())
        (step,) = analyze(CircuitSpec({}, {"m": m}, p, ("m",))).steps
        # oracle: block images of the supported blocks are distinct, entropies from mpmath
        qm, pbar = aggregate(m), aggregate_dist(p.dist, p.pspace)
        targets = [qm.rows[b].unit_target() for b, _ in pbar.items()]
        condrev = None not in targets and len(set(targets)) == len(targets)
        nee = h_exact(pbar) <= h_exact(aggregate_dist(push(m, p).dist, m.cod)) + TOL
        if not (step.flags.fundamental_agree and step.flags.condrev == condrev and step.flags.nee == nee):
            bad.append(i)
        outcomes[nee] += 1
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 30 and outcomes[True] and outcomes[False]
    acceptance_log(
        ok,
        f"2 free-step equivalence: 1000 closed steps, {len(bad)} disagreements "
        f"({outcomes[True]} free, {outcomes[False]} ejecting), {elapsed:.1f}s",
    )
    assert ok, bad[:10]


# -- 3 ----------------------------------------------------------------------------


def test_subpermutation_three_way(acceptance_log):
    kinds = ("subperm", "subperm", "permutation", "deterministic", "function", "general", "stochastic", "quasi_total")
    bad, subperms = [], 0
    for i in range(1000):
        rng = rng_for("three-way", i)
        m = gen.matrix(rng, gen.space(dims(rng), "a"), gen.space(dims(rng), "b"), rng.choice(kinds))
        sp = is_subpermutation(m)
        iso = partial_iso_via_transpose(m)
        ent = entropy_preserving_on_support(m, rng, TOL, count=50)
        subperms += sp
        if not sp == iso == ent:
            bad.append(i)
    ok = not bad and 0 < subperms < 1000
    acceptance_log(ok, f"3 subpermutation three-way: 1000 matrices ({subperms} subpermutations), {len(bad)} discrepancies")
    assert ok, bad[:10]


# -- 4 ----------------------------------------------------------------------------


def test_aggregation_functorial(acceptance_log):
    bad = 0
    for i in range(CASES):
        rng = rng_for("aggregate", i)
        a, b, c = (gen.random_pset(rng, dims(rng), t) for t in "abc")
        m, n = gen.pmatrix(rng, a, b), gen.pmatrix(rng, b, c)
        mn = PMatrix(a, c, compose(m.matrix, n.matrix))
        bad += aggregate(mn) != compose(aggregate(m), aggregate(n))
        a2, b2 = (gen.random_pset(rng, dims(rng), t) for t in "de")
        n2 = gen.pmatrix(rng, a2, b2)
        par = PMatrix(product_pset(a, a2), product_pset(b, b2), kron(m.matrix, n2.matrix))
        bad += aggregate(par) != kron(aggregate(m), aggregate(n2))
    acceptance_log(bad == 0, f"4 aggregation functoriality: {CASES} composable and {CASES} parallel pairs, {bad} failures")
    assert bad == 0


# -- 5 ----------------------------------------------------------------------------


def uneven(rng, sp):
    blocks = [[x] + [f"{x}~{k}" for k in range(1, rng.randint(1, 4))] for x in sp]
    return make_pset([y for blk in blocks for y in blk], blocks)


def test_lift_round_trip(acceptance_log):
    bad = 0
    for i in range(CASES):
        rng = rng_for("lift", i)
        a, b = gen.space(dims(rng), "a"), gen.space(dims(rng), "b")
        mbar = gen.matrix(rng, a, b)
        if rng.random() < 0.5:
            dom, cod = expand_space(a, rng.randint(1, 4)), expand_space(b, rng.randint(1, 4))
        else:
            dom, cod = uneven(rng, a), uneven(rng, b)
        bad += aggregate(lift(mbar, dom, cod)) != mbar
    acceptance_log(bad == 0, f"5 lift round trip: {CASES} matrices, multiplicities 1..4, {bad} failures")
    assert bad == 0


# -- 6 ----------------------------------------------------------------------------


def matrix_pair(kind, op):
    def build(rng):
        a, b, c, d = (gen.space(dims(rng, 5), t) for t in "abcd")
        m = gen.matrix(rng, a, b, kind)
        return m, gen.matrix(rng, b if op == "compose" else c, c if op == "compose" else d, kind)

    return build


def matrix_closure(pred, op):
    def check(case):
        m, n = case
        assert pred(m) and pred(n)
        return pred(compose(m, n) if op == "compose" else kron(m, n))

    return check


def partitioned_pair(op):
    def build(rng):
        a, b, c, d = (gen.random_pset(rng, dims(rng, 5), t) for t in "abcd")
        m = gen.pmatrix(rng, a, b)
        return m, gen.pmatrix(rng, b if op == "compose" else c, c if op == "compose" else d)

    return build


def partitioned_closure(op):
    def check(case):
        m, n = case
        if op == "compose":
            return is_partitioned(compose(m.matrix, n.matrix), m.dom, n.cod)
        return is_partitioned(kron(m.matrix, n.matrix), product_pset(m.dom, n.dom), product_pset(m.cod, n.cod))

    return check


def condrev_pair(op):
    def build(rng):
        m, p = gen.condrev_instance(rng, 5, tag="b")
        if op == "compose":
            n, _ = gen.condrev_instance(rng, 5, dom=m.cod, p=apply(p, m), tag="c")
            return m, n, p, None
        n, p2 = gen.condrev_instance(rng, 5, dom=gen.space(dims(rng, 5), "c"), tag="d")
        return m, n, p, p2

    return build


def condrev_closure(op):
    def check(case):
        m, n, p, p2 = case
        if op == "compose":
            assert is_conditionally_reversible(m, p) and is_conditionally_reversible(n, apply(p, m))
            return is_conditionally_reversible(compose(m, n), p)
        assert is_conditionally_reversible(m, p) and is_conditionally_reversible(n, p2)
        return is_conditionally_reversible(kron(m, n), tensor_dist(p, p2))

    return check


def nee_pair(op):
    def build(rng):
        # resample until both steps are non-entropy-ejecting
        while True:
            if op == "compose":
                m, n, p = g_closed_chain(rng, 5)
                if is_non_entropy_ejecting(m, p, TOL) and is_non_entropy_ejecting(n, push(m, p), TOL):
                    return m, n, p, None
            else:
                m, n, p, p2 = g_closed_par(rng, 4)
                if is_non_entropy_ejecting(m, p, TOL) and is_non_entropy_ejecting(n, p2, TOL):
                    return m, n, p, p2

    return build


def nee_closure(op):
    def check(case):
        m, n, p, p2 = case
        if op == "compose":
            return is_non_entropy_ejecting(PMatrix(m.dom, n.cod, compose(m.matrix, n.matrix)), p, TOL)
        mn = PMatrix(product_pset(m.dom, n.dom), product_pset(m.cod, n.cod), kron(m.matrix, n.matrix))
        return is_non_entropy_ejecting(mn, PhysContext(mn.dom, tensor_dist(p.dist, p2.dist)), TOL)

    return check


CLOSURES = {}
for _name, _pred, _kind in (
    ("deterministic", is_deterministic, "deterministic"),
    ("total", is_total, "stochastic"),
    ("quasi-total", is_quasi_total, "quasi_total"),
    ("subpermutation", is_subpermutation, "subperm"),
):
    for _op in ("compose", "kron"):
        CLOSURES[f"{_name}.{_op}"] = (matrix_pair(_kind, _op), matrix_closure(_pred, _op))
for _op in ("compose", "kron"):
    CLOSURES[f"partitioned.{_op}"] = (partitioned_pair(_op), partitioned_closure(_op))
    CLOSURES[f"condrev.{_op}"] = (condrev_pair(_op), condrev_closure(_op))
    CLOSURES[f"nee.{_op}"] = (nee_pair(_op), nee_closure(_op))

KNOWN_FALSE = {
    "quasi-total.compose": "a quasi-total row split between a defined and an undefined continuation "
    "composes to a row of mass strictly between 0 and 1",
}


def closure_params():
    for key in CLOSURES:
        marks = [pytest.mark.xfail(strict=True, reason=KNOWN_FALSE[key])] if key in KNOWN_FALSE else []
        yield pytest.param(key, marks=marks, id=key)


@pytest.mark.parametrize("key", list(closure_params()))
def test_closure_suite(key, acceptance_log):
    build, check = CLOSURES[key]
    failures = [i for i in range(CASES) if not check(build(rng_for(f"closure.{key}", i)))]
    note = f" (known: {KNOWN_FALSE[key]})" if key in KNOWN_FALSE else ""
    acceptance_log(not failures, f"6 closure {key}: {CASES} admissible pairs, {len(failures)} failures{note}")
    assert not failures


def test_quasi_total_closure_corrected(acceptance_log):
    """Quasi-totality survives composition when the second factor is total on the first's image."""
    failures = 0
    for i in range(CASES):
        rng = rng_for("closure.quasi-total.compose.total-tail", i)
        a, b, c = (gen.space(dims(rng, 5), t) for t in "abc")
        m = gen.matrix(rng, a, b, "quasi_total")
        n = gen.matrix(rng, b, c, rng.choice(("stochastic", "function")))
        assert is_total(n)
        failures += not is_quasi_total(compose(m, n))
    acceptance_log(failures == 0, f"6 closure quasi-total.compose with total second factor: {CASES} pairs, {failures} failures")
    assert failures == 0


# -- 7 ----------------------------------------------------------------------------


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first], *part]
        for k in range(len(part)):
            yield [*part[:k], [first, *part[k]], *part[k + 1 :]]


def middle_four(a, b):
    return structural(
        product_space(product_space(a, a), product_space(b, b)),
        product_space(product_space(a, b), product_space(a, b)),
        lambda t: ((t[0][0], t[1][0]), (t[0][1], t[1][1])),
    )


def test_comonoid_laws_exhaustive(acceptance_log):
    spaces = [gen.space(n, "x") for n in range(1, 7)]
    failures = []
    for x in spaces:
        c, d, i = copy_matrix(x), discard_matrix(x), identity(x)
        if not compose(compose(c, kron(d, i)), left_unitor(x)) == i == compose(compose(c, kron(i, d)), right_unitor(x)):
            failures.append(("counit", len(x)))
        if compose(compose(c, kron(c, i)), associator(x, x, x)) != compose(c, kron(i, c)):
            failures.append(("coassociative", len(x)))
        if compose(c, swap_matrix(x, x)) != c:
            failures.append(("cocommutative", len(x)))
        # the same maps are partitioned for every partition of x
        for blocks in set_partitions(list(x)):
            px = make_pset(x, blocks)
            if not (is_partitioned(c, px, product_pset(px, px)) and is_partitioned(d, px, discrete_pset(ONE))):
                failures.append(("partitioned", len(x), blocks))
    for a in spaces:
        for b in spaces:
            ab = product_space(a, b)
            if compose(kron(copy_matrix(a), copy_matrix(b)), middle_four(a, b)) != copy_matrix(ab):
                failures.append(("uniform copy", len(a), len(b)))
            if compose(kron(discard_matrix(a), discard_matrix(b)), left_unitor(ONE)) != discard_matrix(ab):
                failures.append(("uniform discard", len(a), len(b)))
    if compose(copy_matrix(ONE), left_unitor(ONE)) != identity(ONE) or discard_matrix(ONE) != identity(ONE):
        failures.append(("unit object",))
    acceptance_log(
        not failures,
        f"7 comonoid laws: all 1 <= |X| <= 6, all partitions, all pairs for uniformity, {len(failures)} failures",
    )
    assert not failures, failures[:10]


# -- 8 ----------------------------------------------------------------------------


def subdist_pair(rng):
    a, b = gen.space(dims(rng), "a"), gen.space(dims(rng), "b")
    return gen.subdist(rng, a), gen.subdist(rng, b)


def h_zero(p):
    return p.is_zero() or p.unit_target() is not None


@pytest.mark.xfail(strict=True, reason="equality also holds when a factor has zero entropy")
def test_tensor_entropy_literal(acceptance_log):
    failures, witness = [], None
    for i in range(CASES):
        p, q = subdist_pair(rng_for("tensor-entropy", i))
        hp, hq, hpq = entropy(p), entropy(q), entropy(tensor_dist(p, q))
        equal = abs(hpq - hp - hq) <= TOL
        if hpq > hp + hq + TOL or equal != (p.mass == 1 and q.mass == 1):
            failures.append(i)
            witness = witness or (dict(p.items()), dict(q.items()))
    acceptance_log(
        not failures,
        f"8 tensor entropy, literal 'equal iff both are distributions': {CASES} pairs, {len(failures)} failures"
        + (f" (e.g. p={_fmt(witness[0])}, q={_fmt(witness[1])})" if witness else ""),
    )
    assert not failures


def _fmt(entries):
    return "{" + ", ".join(f"{k}: {v}" for k, v in entries.items()) + "}"


def test_tensor_entropy_corrected(acceptance_log):
    failures = []
    for i in range(CASES):
        p, q = subdist_pair(rng_for("tensor-entropy", i))
        hp, hq, hpq = entropy(p), entropy(q), entropy(tensor_dist(p, q))
        equal = abs(hpq - hp - hq) <= TOL
        expected = (q.mass == 1 or h_zero(p)) and (p.mass == 1 or h_zero(q))
        if hpq > hp + hq + TOL or equal != expected:
            failures.append(i)
    acceptance_log(
        not failures,
        f"8 tensor entropy, 'equal iff each factor is a distribution or the other has zero entropy': "
        f"{CASES} pairs, {len(failures)} failures",
    )
    assert not failures


def test_tensor_entropy_positive_factors(acceptance_log):
    """For factors of positive entropy the literal statement holds."""
    failures, checked, i = [], 0, 0
    while checked < CASES:
        rng = rng_for("tensor-entropy-positive", i)
        i += 1
        a, b = gen.space(dims(rng), "a"), gen.space(dims(rng), "b")
        p, q = (gen.subdist(rng, sp, rng.choice(("dist", "sub"))) for sp in (a, b))
        if h_zero(p) or h_zero(q):
            continue
        checked += 1
        equal = abs(entropy(tensor_dist(p, q)) - entropy(p) - entropy(q)) <= TOL
        failures += [i] if equal != (p.mass == 1 and q.mass == 1) else []
    acceptance_log(not failures, f"8 tensor entropy, positive-entropy factors: {CASES} pairs, {len(failures)} failures")
    assert not failures


def test_deterministic_iff_entropy_nonincreasing(acceptance_log):
    failures, det = [], 0
    for i in range(CASES):
        rng = rng_for("det-entropy", i)
        kind = rng.choice(gen.MATRIX_KINDS + ("general", "subperm"))
        m = gen.matrix(rng, gen.space(dims(rng), "a"), gen.space(dims(rng), "b"), kind)
        d = is_deterministic(m)
        det += d
        if d != entropy_nonincreasing(m, rng, TOL):
            failures.append(i)
    ok = not failures and 0 < det < CASES
    acceptance_log(
        ok, f"8 deterministic iff entropy non-increasing: {CASES} matrices ({det} deterministic), {len(failures)} failures"
    )
    assert ok, failures[:10]
