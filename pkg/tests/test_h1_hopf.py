import random
from fractions import Fraction

import pytest

from exact_scalars import HbarScalar
from h1_hopf import (
    UNIT, H1Element, H1Monomial, H1Tensor, RankMismatchError, antipode, apply_counit,
    coproduct, coproduct_leg, counit, element_from_ints, antipode_monomial, legs_product,
    multiply, parse_element, pbw_monomials, tensor_compose,
)

X, Y, D1, D2 = H1Element.X(), H1Element.Y(), H1Element.delta(1), H1Element.delta(2)
ONE = H1Element.one()
rng = random.Random(4)


def random_element(max_degree=3, terms=3):
    basis = pbw_monomials(max_degree)
    return sum((H1Element.monomial(rng.choice(basis), rng.randint(-3, 3)) for _ in range(terms)), H1Element())


def test_yx_relation():
    assert Y * X == parse_element("X Y + X")


def test_x_delta_relation():
    assert X * D1 == parse_element("d1 X + d2")


def test_y_delta_weight():
    assert Y * D2 == parse_element("d2 Y + 2 d2")


def test_unit_laws():
    a = random_element()
    assert ONE * a == a == a * ONE


def test_associativity_random_triples():
    for _ in range(15):
        a, b, c = random_element(), random_element(), random_element()
        assert (a * b) * c == a * (b * c)


def test_generator_coproducts():
    assert coproduct(ONE) == H1Tensor.unit(2)
    assert coproduct(X) == H1Tensor.from_elements(X, ONE) + H1Tensor.from_elements(ONE, X) + H1Tensor.from_elements(D1, Y)
    assert coproduct(Y) == H1Tensor.from_elements(Y, ONE) + H1Tensor.from_elements(ONE, Y)


def test_coproduct_of_delta2():
    expected = (H1Tensor.from_elements(D2, ONE) + H1Tensor.from_elements(ONE, D2)
                + H1Tensor.from_elements(D1, D1))
    assert coproduct(D2) == expected


def test_delta2_prime_is_primitive():
    d = H1Element.delta2_prime()
    assert coproduct(d) == H1Tensor.from_elements(d, ONE) + H1Tensor.from_elements(ONE, d)


def test_counit_values():
    assert counit(ONE) == HbarScalar.one()
    assert counit(X).is_zero()
    assert counit(parse_element("d1 X Y")).is_zero()


def test_antipode_generators():
    assert antipode(ONE) == ONE
    assert antipode(X) == parse_element("-X + d1 Y")
    assert antipode(Y) == -Y
    assert antipode(D2) == parse_element("-d2 + d1^2")
    assert antipode(H1Element.delta2_prime()) == -H1Element.delta2_prime()


@pytest.mark.parametrize("monomial", pbw_monomials(5), ids=str)
def test_coassociativity(monomial):
    t = coproduct(H1Element.monomial(monomial))
    assert coproduct_leg(t, 1) == coproduct_leg(t, 2)


def _right_antipode_product(t):
    out = H1Element()
    for (left, right), c in t.items():
        out = out + H1Element.monomial(left, c) * element_from_ints(antipode_monomial(right))
    return out


@pytest.mark.parametrize("monomial", pbw_monomials(4), ids=str)
def test_antipode_axioms(monomial):
    a = H1Element.monomial(monomial)
    t = coproduct(a)
    expected = H1Element.scalar(counit(a))
    assert legs_product(t, antipode_monomial) == expected
    assert _right_antipode_product(t) == expected


def test_coproduct_and_counit_are_algebra_maps():
    for _ in range(10):
        a, b = random_element(2), random_element(2)
        assert coproduct(a * b) == coproduct(a) * coproduct(b)
        assert counit(a * b) == counit(a) * counit(b)


def test_antipode_is_anti_homomorphism():
    for _ in range(10):
        a, b = random_element(2), random_element(2)
        assert antipode(a * b) == antipode(b) * antipode(a)


def test_tensor_compose_examples():
    t = H1Tensor.from_elements(X, Y) * H1Tensor.from_elements(ONE, Y)
    assert t == H1Tensor.from_elements(X, Y * Y)
    s = H1Tensor.from_elements(Y, ONE) * H1Tensor.from_elements(X, ONE)
    assert s == H1Tensor.from_elements(X * Y + X, ONE)
    r = H1Tensor.from_elements(D1, X)
    assert H1Tensor.unit(2) * r == r


def test_tensor_rank_mismatch():
    with pytest.raises(RankMismatchError):
        tensor_compose(H1Tensor.unit(2), H1Tensor.unit(3))


def test_coproduct_leg_examples():
    assert coproduct_leg(H1Tensor.unit(2), 1) == H1Tensor.unit(3)
    expected = (H1Tensor.from_elements(X, ONE, Y) + H1Tensor.from_elements(ONE, X, Y)
                + H1Tensor.from_elements(D1, Y, Y))
    assert coproduct_leg(H1Tensor.from_elements(X, Y), 1) == expected
    assert coproduct_leg(H1Tensor.from_elements(Y, Y), 2) == (
        H1Tensor.from_elements(Y, Y, ONE) + H1Tensor.from_elements(Y, ONE, Y))


def test_apply_counit_drops_non_unit_legs():
    t = H1Tensor.unit(2) + H1Tensor.from_elements(X, Y)
    assert apply_counit(t, 1) == ONE
    assert apply_counit(t, 2) == ONE


def test_monomial_text_round_trip():
    m = H1Monomial(((1, 2), (3, 1)), 2, 1)
    assert m.text() == "d1^2 d3 X^2 Y"
    assert H1Monomial.parse(m.text()) == m
    assert UNIT.text() == "1"
    assert m.latex() == "\\delta_{1}^{2}\\delta_{3}X^{2}Y"


def test_tensor_json_sorted():
    t = H1Tensor.from_elements(Y, X) + H1Tensor.from_elements(X, Y) * Fraction(1, 2)
    data = t.to_json()
    assert [e["legs"] for e in data] == sorted([e["legs"] for e in data], key=lambda legs: tuple(H1Monomial.parse(x) for x in legs))
    assert H1Tensor.from_json(2, data) == t
