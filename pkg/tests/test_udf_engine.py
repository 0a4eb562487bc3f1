import random
from fractions import Fraction

import pytest

from exact_scalars import HbarScalar
from h1_hopf import H1Element, H1Tensor, antipode, coproduct
from jet_model import IDENTITY, CrossedElement, JetPoly, make_word
from udf_engine import (
    ExtractionError, RTensor, TwistError, calibrate_moyal_sign, first_order_R, max_total_degree,
    tuple_order,
)

A = make_word("a")
B = make_word("b")
AB = make_word("a b")
f = JetPoly.function("f")
g = JetPoly.function("g")
X, Y = H1Element.X(), H1Element.Y()
C = HbarScalar.monomial(1, 0, Fraction(-1, 2))
HALF = Fraction(1, 2)
WORDS = ["a", "b", "a b", "b^-1", "id"]


def tensor(*pairs):
    total = H1Tensor(2)
    for left, right in pairs:
        total = total + H1Tensor.from_elements(left, right)
    return total


def shifted(s):
    return Y + H1Element.scalar(Fraction(s))


def random_pair(rng):
    poly = JetPoly.function(rng.choice("fg"), rng.randint(0, 1), rng.randint(0, 1))
    return poly, make_word(rng.choice(WORDS))


def test_order_bounds():
    assert tuple_order((0, 4, 0, 0, 0)) == 3
    assert tuple_order((3, 0, 0, 0, 0)) == 3
    assert [max_total_degree(n) for n in range(4)] == [0, 1, 3, 4]


def test_order_zero_is_unit(r_order2):
    assert r_order2.order(0) == H1Tensor.unit(2)


def test_first_order(r_order2):
    assert r_order2.order(1) == first_order_R()
    s_x = antipode(X)
    assert r_order2.order(1) == tensor((s_x, Y), (Y, X)) * C


def test_single_first_order_contributions(engine):
    pieces = engine.extract_terms(2)
    assert pieces[((1, 0, 0, 0, 0), (0, 0, 1, 0, 0))] == tensor((X, Y)) * HbarScalar.monomial(1, 0, HALF)
    assert pieces[((0, 0, 1, 0, 0), (1, 0, 0, 0, 0))] == (
        tensor((H1Element.delta(1) * Y, Y), (Y, X)) * HbarScalar.monomial(1, 0, -HALF))


def test_second_order_pieces(engine):
    pieces = engine.extract_terms(2)
    d2p = H1Element.delta2_prime()
    c2 = C * C
    one = H1Element.one()
    assert pieces[((0, 3, 0, 0, 0), (3, 0, 0, 0, 0))] == (
        tensor((d2p * shifted(1) * shifted(HALF) * Y, one)) * c2.scale(Fraction(-1, 12)))
    assert pieces[((2, 0, 0, 0, 0), (0, 0, 2, 0, 0))] == tensor((X * X, shifted(HALF) * Y)) * c2.scale(HALF)
    xh = X * shifted(HALF)
    assert pieces[((1, 0, 1, 0, 0), (1, 0, 1, 0, 0))] == (
        tensor((xh, xh), (H1Element.delta(1) * xh, Y * shifted(HALF))) * (-c2))


def test_second_order(r_order2):
    s_x = antipode(X)
    d2p = H1Element.delta2_prime()
    yh = shifted(HALF)
    expected = (
        tensor((s_x * s_x, yh * Y)) * HALF
        + tensor((s_x * yh, X * yh))
        + tensor((Y * yh, X * X)) * HALF
        + tensor((d2p * yh * Y, Y)) * HALF
        + tensor((d2p, shifted(1) * yh * Y)) * Fraction(1, 6)
        + tensor((d2p * Y, yh * Y)) * HALF
    ) * (C * C)
    assert r_order2.order(2) == expected


def test_contributing_tuples_are_ordered(engine):
    rows = engine.contributing_tuples(2)
    orders = [row["order"] for row in rows]
    assert orders == sorted(orders)
    first = [(row["m"], row["n"]) for row in rows if row["order"] == 1]
    assert ((1, 0, 0, 0, 0), (0, 0, 1, 0, 0)) in first
    assert rows[0]["order"] == 0


def test_star_order_zero(engine):
    result = engine.star((f, A), (g, B), 0)
    assert result.value == CrossedElement.single(f * g.prefixed(A), AB)
    assert result.order == 0


def test_star_units(engine):
    assert engine.star((JetPoly.one(), IDENTITY), (g, B), 2).value == CrossedElement.single(g, B)
    assert engine.star((f, A), (JetPoly.one(), IDENTITY), 2).value == CrossedElement.single(f, A)


def test_star_rejects_negative_order(engine):
    with pytest.raises(ValueError):
        engine.star((f, A), (g, B), -1)


def test_star_via_R_order_zero_is_crossed_product(engine, r_order2):
    a = CrossedElement.single(f, A)
    b = CrossedElement.single(g, B)
    assert engine.star_via_R(r_order2, a, b, 0) == CrossedElement.single(f * g.prefixed(A), AB)
    assert engine.star_via_R(r_order2, CrossedElement.one(), b, 2) == b


def test_star_via_R_matches_star(engine, r_order2):
    rng = random.Random(5)
    for _ in range(5):
        (p, w), (q, z) = random_pair(rng), random_pair(rng)
        direct = engine.star((p, w), (q, z), 2).value
        factored = engine.star_via_R(r_order2, CrossedElement.single(p, w), CrossedElement.single(q, z), 2)
        assert direct == factored


@pytest.mark.slow
def test_star_via_R_matches_star_order_three(engine):
    r_order3 = engine.extract_R(3)
    rng = random.Random(17)
    for _ in range(20):
        (p, w), (q, z) = random_pair(rng), random_pair(rng)
        direct = engine.star((p, w), (q, z), 3).value
        factored = engine.star_via_R(r_order3, CrossedElement.single(p, w), CrossedElement.single(q, z), 3)
        assert direct == factored


def test_associativity_through_R(engine, r_order2):
    rng = random.Random(23)
    for _ in range(3):
        a, b, c = (CrossedElement.single(*random_pair(rng)) for _ in range(3))
        left = engine.star_via_R(r_order2, engine.star_via_R(r_order2, a, b, 2), c, 2)
        right = engine.star_via_R(r_order2, a, engine.star_via_R(r_order2, b, c, 2), 2)
        assert left == right


@pytest.mark.slow
def test_star_is_associative(engine):
    rng = random.Random(29)
    for _ in range(10):
        a, b, c = (CrossedElement.single(*random_pair(rng)) for _ in range(3))
        left = engine.star_elements(engine.star_elements(a, b, 3), c, 3)
        right = engine.star_elements(a, engine.star_elements(b, c, 3), 3)
        assert left == right


def test_udf_axioms_order_two(engine, r_order2):
    report = engine.verify_udf(r_order2)
    assert report.passed
    names = [e.name for e in report.entries]
    assert "pentagon ħ^2" in names
    assert "counit ε⊗1" in names


@pytest.mark.slow
def test_udf_axioms_order_three(engine):
    assert engine.verify_udf(engine.extract_R(3)).passed


def test_broken_R_fails_pentagon(engine, r_order2):
    broken = RTensor([r_order2.order(0), r_order2.order(1) * 2, r_order2.order(2)])
    report = engine.verify_udf(broken)
    assert not report.passed
    assert report.failures[0].name == "pentagon ħ^2"


def test_extraction_rejects_foreign_letters(engine):
    with pytest.raises(ExtractionError):
        engine._extract(JetPoly.function("h") * JetPoly.function("g", prefix=A))
    with pytest.raises(ExtractionError):
        engine._extract(f)


def test_twist(engine, r_order2):
    result = engine.twist(r_order2)
    assert result.r_inverse.order(1) == -r_order2.order(1)
    assert result.v.truncate(0) == H1Element.one()
    assert result.twisted_coproduct["Y"].truncate(0) == coproduct(Y)
    assert result.twisted_antipode["X"].truncate(0) == antipode(X)
    report = engine.check_twist(r_order2)
    assert report.passed


def test_twist_needs_unit_start(engine):
    with pytest.raises(TwistError):
        engine.twist(RTensor([H1Tensor(2)]))


def test_rtensor_json(r_order2):
    data = r_order2.to_json()
    assert [entry["k"] for entry in data["orders"]] == [0, 1, 2]
    assert RTensor.from_json(data) == r_order2


def test_rtensor_latex_factors_out_hbar(r_order2):
    lines = dict(r_order2.latex_lines())
    assert lines[1].startswith("\\left(-\\frac{i\\hbar}{2}\\right)\\left[")
    assert lines[2].startswith("\\left(-\\frac{i\\hbar}{2}\\right)^{2}")
    assert "ħ^1" in r_order2.text()


def test_calibration_picks_one_sign():
    outcome = calibrate_moyal_sign()
    assert outcome["sign"] == 1
    assert outcome["matches"] == {1: True, -1: False}
