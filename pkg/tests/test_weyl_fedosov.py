from fractions import Fraction

import pytest

from exact_scalars import HbarScalar
from jet_model import JetPoly, delta2_prime, make_word, word_inverse
from weyl_fedosov import (
    CoeffExpr, FedosovConvergenceError, FormSection, MoyalProduct, SectionContext,
    UnknownSectionKindError, WeylSection, build_section, connection_apply, degree_section, delta_form,
    family_for, family_residual, fedosov_iterate, fiber_delta, fiber_delta_inverse, flat_associator,
    moyal, moyal_weight, residual_window, solve_recursion, valuation_bound_holds,
)

A = make_word("a")
AB = make_word("a b")
CTX = SectionContext()
f = JetPoly.function("f")
u = WeylSection.monomial(1, 0)
v = WeylSection.monomial(0, 1)
RESOLVED_KINDS = ["hat_f", "alpha_hat_g", "u_alpha_inv", "u_alpha_beta", "v_alphabeta", "u_alpha"]


def constant(value: HbarScalar) -> WeylSection:
    return WeylSection.constant(JetPoly.scalar(value))


def test_moyal_commutator_of_u_and_v():
    assert moyal(u, v) - moyal(v, u) == constant(HbarScalar.monomial(1, 0, -1))
    assert moyal(u, v, sign=-1) - moyal(v, u, sign=-1) == constant(HbarScalar.monomial(1, 0, 1))


def test_moyal_u_squared_times_v_squared():
    c = HbarScalar.monomial(1, 0, Fraction(-1, 2))
    expected = (WeylSection.monomial(2, 2)
                + WeylSection.monomial(1, 1).times(c * 4)
                + constant(c * c * 2))
    assert moyal(WeylSection.monomial(2, 0), WeylSection.monomial(0, 2)) == expected
    assert moyal_weight(2, 0, 0, 2, 2) == 2


def test_moyal_is_associative_on_small_sections():
    a = WeylSection.monomial(2, 1, CoeffExpr.of(f, 1))
    b = WeylSection.monomial(1, 2) + WeylSection.monomial(0, 1, CoeffExpr.of(JetPoly.jet("a", 1)))
    c = WeylSection.monomial(2, 0) + u
    product = MoyalProduct(1)
    assert product.product(product.product(a, b), c) == product.product(a, product.product(b, c))


def test_origin_contraction():
    product = MoyalProduct(1)
    c = HbarScalar.monomial(1, 0, Fraction(-1, 2))
    assert product.origin_contraction(((1, 0), (0, 1))) == c
    assert product.origin_contraction(((0, 1), (1, 0))) == -c
    assert product.origin_contraction(((0, 0),)) == 1
    assert product.origin_contraction(((2, 0), (0, 1))) == 0
    full = product.product_chain([u, WeylSection.monomial(1, 1), v]).restrict_origin().grade_zero()
    assert full == JetPoly.scalar(product.origin_contraction(((1, 0), (1, 1), (0, 1))))


def test_invalid_sign_is_rejected():
    with pytest.raises(ValueError):
        MoyalProduct(2)


def test_hat_f_low_coefficients():
    section = solve_recursion("hat_f", CTX, 2, 2)
    assert section.coefficient(1, 0) == CoeffExpr.of(JetPoly.function("f", 1, 0), 1)
    assert section.coefficient(0, 1) == CoeffExpr.of(-JetPoly.function("f", 0, 1), -1)
    assert section.coefficient(0, 0) == CoeffExpr.of(f)


def test_cubic_coefficients_of_twisted_units():
    minus = HbarScalar.monomial(-1, 0, Fraction(-1, 6))
    u_inv = solve_recursion("u_alpha_inv", CTX, 3, 0)
    assert u_inv.coefficient(3, 0) == CoeffExpr.of(delta2_prime(A) * minus, 3)
    v_ab = solve_recursion("v_alphabeta", CTX, 3, 0)
    assert v_ab.coefficient(3, 0) == CoeffExpr.of(delta2_prime(AB) * (-minus), 3)
    u_ab = solve_recursion("u_alpha_beta", CTX, 3, 0)
    transported = delta2_prime(make_word("b")).prefixed(A)
    assert u_ab.coefficient(3, 0) == CoeffExpr.of(transported * minus, 3)
    assert u_inv.coefficient(0, 0) == CoeffExpr.one()
    for m in range(1, 3):
        assert u_inv.coefficient(m, 0).is_zero()


@pytest.mark.parametrize("kind", RESOLVED_KINDS)
def test_closed_form_matches_recursion(kind):
    assert build_section(kind, CTX, 6, 3) == solve_recursion(kind, CTX, 6, 3)


@pytest.mark.parametrize("kind", RESOLVED_KINDS)
def test_sections_solve_their_equation(kind):
    family = family_for(kind, CTX)
    section = solve_recursion(kind, CTX, 5, 4)
    residual = family_residual(family, section).window(*residual_window(5, 4))
    assert residual.is_zero()


def test_printed_alpha_hat_g_agrees():
    assert build_section("alpha_hat_g", CTX, 5, 3, variant="printed") == build_section("alpha_hat_g", CTX, 5, 3)


def test_printed_hat_f_differs_only_by_n_factorial():
    printed = build_section("hat_f", CTX, 3, 3, variant="printed")
    resolved = build_section("hat_f", CTX, 3, 3)
    assert printed.window(3, 1) == resolved.window(3, 1)
    assert printed.coefficient(1, 2) == resolved.coefficient(1, 2).scale(2)


def test_unknown_kind():
    with pytest.raises(UnknownSectionKindError):
        family_for("w_alpha")
    with pytest.raises(ValueError):
        build_section("hat_f", CTX, 2, variant="drawn")


def test_valuation_bound():
    for kind in ("u_alpha_inv", "v_alphabeta", "u_alpha_beta"):
        assert valuation_bound_holds(solve_recursion(kind, CTX, 9, 2))


def test_connection_is_flat():
    a = (WeylSection.monomial(2, 1, CoeffExpr.of(f, 1))
         + WeylSection.monomial(0, 3, CoeffExpr.of(JetPoly.function("g", 1, 0), -2)))
    assert connection_apply("D", connection_apply("D", a)).is_zero()
    rho = delta2_prime(A)
    twisted = connection_apply("alpha_D", a, rho=rho)
    assert connection_apply("alpha_D", twisted, rho=rho).is_zero()


def test_alpha_connection_needs_jet():
    with pytest.raises(ValueError):
        connection_apply("alpha_D", u)
    with pytest.raises(ValueError):
        connection_apply("nabla", u)


def test_koszul_homotopy_on_one_forms():
    form = FormSection({
        "x": WeylSection.monomial(1, 2, CoeffExpr.of(f, 0)),
        "y": WeylSection.monomial(2, 0, CoeffExpr.of(JetPoly.jet("a", 1), 1)),
    })
    down = fiber_delta(fiber_delta_inverse(form).component("0"))
    up = fiber_delta_inverse(fiber_delta(form))
    total = down + FormSection({"x": up.component("x"), "y": up.component("y")})
    assert (total - form).is_zero()


@pytest.mark.parametrize("degree", [2, 3])
def test_inverse_law_of_twisted_units(degree):
    inverse = degree_section("u_alpha_inv", CTX, degree)
    unit = degree_section("u_alpha", CTX, degree)
    star = MoyalProduct(1)
    assert star.product(inverse, unit, degree=degree) == WeylSection.one()
    assert star.product(unit, inverse, degree=degree) == WeylSection.one()


def test_degree_section_keeps_higher_hbar_terms():
    section = degree_section("u_alpha_inv", CTX, 3)
    assert section.truncate(degree=3) == section
    assert section.truncate(degree=2) == degree_section("u_alpha_inv", CTX, 2)
    with pytest.raises(ValueError):
        degree_section("hat_f", CTX, -1)


def test_transport_of_inverse_unit():
    # α(U⁻¹_{α⁻¹}) = U_α
    transported = degree_section("u_alpha_beta", SectionContext(beta=word_inverse(A)), 3)
    assert transported == degree_section("u_alpha", CTX, 3)


@pytest.mark.parametrize("degree", [2, 3])
def test_flat_associator_is_flat(degree):
    v = flat_associator(CTX, degree)
    assert connection_apply("D", v).truncate(degree=degree - 1).is_zero()


def test_fedosov_iteration_reproduces_hat_f():
    iterated = fedosov_iterate(None, None, 3, seed=f)
    assert iterated == solve_recursion("hat_f", CTX, 3, 3).truncate(degree=3)


def test_fedosov_iteration_reproduces_twisted_unit():
    rho = delta2_prime(A)
    iterated = fedosov_iterate(None, delta_form(rho), 3)
    assert iterated == solve_recursion("u_alpha_inv", CTX, 9, 3).truncate(degree=3)


@pytest.mark.slow
def test_fedosov_iteration_reproduces_u_alpha_beta():
    family = family_for("u_alpha_beta", CTX)
    iterated = fedosov_iterate(delta_form(family.rho_left), delta_form(family.rho_right), 4)
    assert iterated == solve_recursion("u_alpha_beta", CTX, 12, 4).truncate(degree=4)


def test_fedosov_rejects_non_dx_twist():
    bad = FormSection({"y": u})
    with pytest.raises(ValueError):
        fedosov_iterate(bad, None, 2)
    assert issubclass(FedosovConvergenceError, ValueError)
