import math

import mpmath
import pytest

from grc.circuit import builtin_gate
from grc.entropy import (
    CompContext,
    PhysContext,
    check_fundamental,
    entropy,
    is_comp_transformation,
    is_conditionally_reversible,
    is_free_comp,
    is_free_phy,
    is_non_entropy_ejecting,
    is_phys_transformation,
    ledger,
    push,
    restrict,
)
from grc.errors import (
    KeyOutsideSpace,
    NotADistribution,
    NotClosedTransformation,
    NotDeterministic,
    ShapeMismatch,
)
from grc.partitioned import PMatrix, discrete_pset, indiscrete_pset, make_pset, pidentity
from grc.subdist import from_function, identity, make_matrix, make_subdist, tensor_dist, uniform, unit

TOL = 1e-9
MERGE = from_function("ab", "c", {"a": "c", "b": "c"})


def mp_entropy(values):
    mpmath.mp.dps = 40
    return float(-sum(mpmath.mpf(v.numerator) / v.denominator * mpmath.log(mpmath.mpf(v.numerator) / v.denominator, 2) for v in values if v))


def test_entropy_examples():
    assert entropy(unit("ab", "a")) == 0.0
    assert entropy(uniform("ab")) == pytest.approx(1.0, abs=TOL)
    assert abs(entropy(make_subdist("xy", {"x": "1/4", "y": "3/4"})) - 0.8112781244591328) <= TOL


@pytest.mark.parametrize(
    "entries",
    [{"a": "1/3", "b": "2/3"}, {"a": "1/64", "b": "63/64"}, {"a": "1/7", "b": "2/7", "c": "1/7"}, {"a": "5/6"}],
)
def test_entropy_matches_high_precision_oracle(entries):
    p = make_subdist("abc", entries)
    assert abs(entropy(p) - mp_entropy(p.entries.values())) <= 1e-12


def test_entropy_base_is_configurable():
    assert entropy(uniform("abcd"), base=math.e) == pytest.approx(math.log(4))


def test_ledger():
    d = discrete_pset("abcd")
    assert ledger(PhysContext(d, uniform("abcd"))).h_nc == 0.0
    two_blocks = make_pset("abcd", [["a", "b"], ["c", "d"]])
    led = ledger(PhysContext(two_blocks, uniform("abcd")))
    assert (led.h_phy, led.h_comp, led.h_nc) == pytest.approx((2.0, 1.0, 1.0), abs=TOL)
    one = indiscrete_pset("abc")
    led = ledger(PhysContext(one, make_subdist("abc", {"a": "1/2", "b": "1/2"})))
    assert led.h_comp == 0.0 and led.h_nc == pytest.approx(led.h_phy)


def test_ledger_json_rounds_to_12_digits():
    led = ledger(PhysContext(discrete_pset("xy"), make_subdist("xy", {"x": "1/4", "y": "3/4"})))
    assert led.to_json() == {"h_phy": 0.811278124459, "h_comp": 0.811278124459, "h_nc": 0.0}


def test_contexts_must_be_distributions():
    with pytest.raises(NotADistribution):
        CompContext(make_subdist("ab", {"a": "1/2"}))
    with pytest.raises(NotADistribution):
        PhysContext(discrete_pset("ab"), make_subdist("ab", {"a": "1/2"}))


def test_is_comp_transformation():
    p = CompContext(uniform("ab"))
    assert is_comp_transformation(identity("ab"), p, p)
    assert is_comp_transformation(MERGE, p, CompContext(unit("c", "c")))
    assert not is_comp_transformation(identity("ab"), p, CompContext(unit("ab", "a")))


def test_is_phys_transformation():
    d = discrete_pset("abc")
    perm = PMatrix(d, d, from_function("abc", "abc", {"a": "b", "b": "c", "c": "a"}))
    p = PhysContext(d, make_subdist("abc", {"a": "1/2", "b": "1/3", "c": "1/6"}))
    assert is_phys_transformation(perm, p, push(perm, p))
    assert is_phys_transformation(pidentity(d), p, p)
    ab, c = discrete_pset("ab"), discrete_pset("c")
    merge = PMatrix(ab, c, MERGE)
    assert not is_phys_transformation(merge, PhysContext(ab, uniform("ab")), PhysContext(c, unit("c", "c")))
    with pytest.raises(ShapeMismatch):
        is_phys_transformation(merge, p, p)


def test_restrict():
    m = make_matrix("abc", "y", {"a": {"y": "1/2"}, "b": {"y": 1}})
    assert restrict(m, unit("abc", "a")).dom == ("a",)
    assert restrict(m, uniform("abc")) == m
    assert restrict(m, make_subdist("abc", {"a": "1/2", "b": "1/2"})).dom == ("a", "b")
    with pytest.raises(KeyOutsideSpace):
        restrict(m, uniform("ab"))


def test_conditional_reversibility():
    assert is_conditionally_reversible(identity("ab"), uniform("ab"))
    assert is_conditionally_reversible(MERGE, CompContext(unit("ab", "a")))
    assert not is_conditionally_reversible(MERGE, uniform("ab"))
    assert is_free_comp(MERGE, unit("ab", "b"))
    partial = make_matrix("ab", "c", {"a": {"c": 1}})
    assert not is_conditionally_reversible(partial, uniform("ab"))
    with pytest.raises(NotDeterministic):
        is_conditionally_reversible(make_matrix("a", "xy", {"a": {"x": "1/2", "y": "1/2"}}), unit("a", "a"))


def landauer():
    e = builtin_gate("erase", 2)
    uniform_bit = PhysContext(e.dom, uniform(e.dom.elements))
    block0 = PhysContext(e.dom, uniform(e.dom.elements, ["0", "0#1"]))
    return e, uniform_bit, block0


def test_landauer_hand_ledger():
    e, p, _ = landauer()
    before, after = ledger(p), ledger(push(e, p))
    assert (before.h_phy, before.h_comp, before.h_nc) == pytest.approx((2, 1, 1), abs=TOL)
    assert (after.h_phy, after.h_comp, after.h_nc) == pytest.approx((2, 0, 2), abs=TOL)
    assert not is_non_entropy_ejecting(e, p)
    assert not is_free_phy(e, p)


def test_non_entropy_ejecting_examples():
    d = discrete_pset("abc")
    perm = PMatrix(d, d, from_function("abc", "abc", {"a": "c", "b": "a", "c": "b"}))
    p = PhysContext(d, make_subdist("abc", {"a": "1/2", "b": "1/2"}))
    assert is_non_entropy_ejecting(perm, p)
    assert is_non_entropy_ejecting(pidentity(d), p)
    assert is_free_phy(perm, p)


def test_not_closed_raises():
    ab, c = discrete_pset("ab"), discrete_pset("c")
    with pytest.raises(NotClosedTransformation):
        is_non_entropy_ejecting(PMatrix(ab, c, MERGE), PhysContext(ab, uniform("ab")))


def test_free_phy_needs_deterministic_aggregate():
    x = indiscrete_pset(["a0", "a1"])
    y = discrete_pset("uw")
    coin = PMatrix(x, y, make_matrix(x.elements, "uw", {k: {"u": "1/2", "w": "1/2"} for k in x.elements}))
    p = PhysContext(x, uniform(x.elements))
    assert is_non_entropy_ejecting(coin, p)
    assert not is_free_phy(coin, p)
    with pytest.raises(NotDeterministic):
        check_fundamental(coin, p)


def test_check_fundamental_examples():
    cnot = builtin_gate("cnot", 1)
    r = check_fundamental(cnot, PhysContext(cnot.dom, uniform(cnot.dom.elements)))
    assert (r.nee, r.condrev, r.agree) == (True, True, True)
    e, p, block0 = landauer()
    r = check_fundamental(e, p)
    assert (r.nee, r.condrev, r.agree) == (False, False, True)
    r = check_fundamental(e, block0)
    assert (r.nee, r.condrev, r.agree) == (True, True, True)


def test_tensor_entropy_degenerate_equality():
    # equality without both factors being distributions: a unit times a strict subdistribution
    p, q = unit("a", "a"), make_subdist("xy", {"x": "1/4", "y": "1/4"})
    assert q.mass < 1
    assert abs(entropy(tensor_dist(p, q)) - entropy(p) - entropy(q)) <= TOL
