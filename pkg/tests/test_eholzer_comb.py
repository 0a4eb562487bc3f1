from fractions import Fraction
from math import factorial

import pytest

from eholzer_comb import (
    ExcludedPointError, RationalPoint, assoc_binomial_sides, assoc_identity_check,
    assoc_pochhammer_sides, assoc_t_sum, binom, degree_bounds, grid_points, half_weight_sides,
    pochhammer_binom, reduced_half_weight_sides, run_identity_grid, s0, s_closed, s_sum, s_sums,
    symbolic_check, to_rational, triple_identity_check, triple_sides, zagier_P, zagier_Q, zagier_check,
)

HALF = Fraction(1, 2)


def test_pochhammer_and_binomial():
    assert pochhammer_binom(4, 3, "rising_product") == 120
    assert pochhammer_binom("-1/2", 1) == -HALF
    assert pochhammer_binom(4, 2) == 6 == (-1) ** 2 * pochhammer_binom(-3, 2)
    assert pochhammer_binom(7, 0, "rising_product") == 1
    with pytest.raises(ValueError):
        pochhammer_binom(1, 2, "falling")
    with pytest.raises(ValueError):
        pochhammer_binom(1, -1)


def test_binomial_edges():
    assert binom(3, 5) == 0
    assert binom(Fraction(5, 2), -1) == 0
    assert binom(-1, 4) == 1


def test_to_rational():
    assert to_rational("3/2") == Fraction(3, 2)
    assert to_rational(4) == 4
    with pytest.raises(ValueError):
        to_rational("three")
    with pytest.raises(ValueError):
        to_rational(True)


def test_rational_point():
    point = RationalPoint.of(k2=2, l2="1/2", m2=4)
    assert point["l2"] == HALF
    assert point.get("a") is None
    assert point.label() == "2k=2, 2l=1/2, 2m=4"


def test_assoc_n_zero():
    report = assoc_identity_check(0, RationalPoint.of(k2=3, l2=5, m2=7))
    assert report.passed
    assert report.entries[0].data["lhs"] == "1"


def test_assoc_first_order_at_twos():
    assert assoc_pochhammer_sides(1, 0, 2, 2, 2) == (4, 4)
    assert assoc_binomial_sides(1, 0, 2, 2, 2) == (4, 4)
    assert assoc_t_sum(1, 0, 2, 2, 2) == 4


@pytest.mark.parametrize("n", range(5))
def test_assoc_three_forms_agree(n):
    for point in (RationalPoint.of(k2=2, l2=4, m2=6), RationalPoint.of(k2="1/2", l2="7/3", m2=5)):
        assert assoc_identity_check(n, point).passed


def test_assoc_excluded_point_is_not_a_failure():
    with pytest.raises(ExcludedPointError):
        assoc_pochhammer_sides(2, 1, 0, 2, 2)
    report = assoc_identity_check(2, RationalPoint.of(k2=0, l2=2, m2=2))
    assert report.passed
    assert any(e.data.get("excluded") for e in report.entries)


def test_zagier_low_orders():
    assert zagier_P(0, 3, 2, HALF) == zagier_Q(0, 3, 2, HALF) == 1
    y, z = Fraction(2), Fraction(3)
    assert zagier_P(1, y, z, HALF) == zagier_Q(1, y, z, HALF) == -8 * y * z * (y + z)
    lhs, rhs = half_weight_sides(1, y, z)
    assert lhs == rhs == -(2 * y) * (2 * z) * (2 * y + 2 * z)


@pytest.mark.parametrize("a", [HALF, Fraction(1), Fraction(3, 2)])
def test_zagier_identity(a):
    for n in range(5):
        for y, z in ((1, 1), (2, 5), (Fraction(7, 3), 4)):
            assert zagier_check(n, a, y, z).passed


def test_half_weight_chain():
    report = zagier_check(3, HALF, 2, 3)
    names = [e.name for e in report.entries]
    assert "a=1/2 reduced form" in names
    assert "simplification/reflection" in names
    assert report.passed


def test_reduced_half_weight_example():
    assert reduced_half_weight_sides(1, 1, 1) == (4, 4)


def test_s_sum_examples():
    assert s0(2, 1, 1) == 4 == s_sum(2, 2)
    assert s_sum(2, 2) + 2 * s_sum(1, 3) == 10 == binom(5, 2)
    assert s_sum(0, Fraction(17, 5)) == 1
    assert all(s_sum(n, 6) == s_closed(n, 6) for n in range(8))


def test_s_sums_bundle():
    bundle = s_sums(6, A=3, B="1/2", X=4, y=2, z=5)
    assert bundle.report.passed
    assert bundle.values["S0"] == bundle.values["S(A+B)"]
    with pytest.raises(ValueError):
        s_sums(-1)


def test_triple_identity_small_cases():
    E = Fraction(5)
    assert triple_sides(0, 0, 0, E) == (1, 1)
    assert triple_sides(1, 0, 0, E) == (-2 * E, -2 * E)
    for e in range(1, 11):
        assert triple_sides(1, 1, 0, e) == (-(e + 1), -(e + 1))


def test_triple_identity_check_reports_weights():
    report = triple_identity_check(2, 1, 1, Fraction(7, 2), weights=(1, 2, 3))
    assert report.passed
    assert report.entries[1].status in ("info", "discrepancy")
    with pytest.raises(ValueError):
        triple_identity_check(-1, 0, 0, 1)


@pytest.mark.parametrize("identity,n", [("assoc", 3), ("zagier", 2), ("s_sums", 4), ("triple", 1)])
def test_symbolic_identities(identity, n):
    report = symbolic_check(identity, n)
    assert report.passed


def test_degree_bounds():
    assert degree_bounds("assoc", 8) == {"k2": 8, "l2": 8, "m2": 8}
    assert degree_bounds("zagier", 2)["y"] == 4
    with pytest.raises(ValueError):
        degree_bounds("cmz", 1)


def test_grid_points_are_sorted():
    points = grid_points({"y": [3, 1], "z": ["1/2"]})
    assert [p["y"] for p in points] == [1, 3]


def test_grid_runner_records_degree_bound():
    grid = {"k2": [2, 4, 6, 8], "l2": [1, 3, 5, 7], "m2": [2, 3, 4, 5]}
    report = run_identity_grid("assoc", 3, grid)
    assert report.passed
    assert report.metadata["polynomial_identity_established"] is True
    small = run_identity_grid("assoc", 3, {"k2": [2], "l2": [2], "m2": [2]})
    assert small.passed
    assert small.metadata["polynomial_identity_established"] is False


def test_grid_runner_parallel_matches_serial():
    grid = {"a": ["1/2", 1], "y": [1, 2, 3], "z": [2, 4]}
    serial = run_identity_grid("zagier", 3, grid)
    parallel = run_identity_grid("zagier", 3, grid, jobs=2)
    assert serial.to_dict() == parallel.to_dict()


def test_grid_runner_triple_and_s_sums():
    assert run_identity_grid("triple", 2, {"E": [1, 2, "5/2"]}).passed
    assert run_identity_grid("s_sums", 5, {"A": [0, 2], "B": [1, 3], "X": [2, 5]}).passed


def test_grid_runner_rejects_bad_input():
    with pytest.raises(ValueError):
        run_identity_grid("assoc", 2, {"k2": [2]})
    with pytest.raises(ValueError):
        run_identity_grid("moyal", 2, {"E": [1]})
    with pytest.raises(ValueError):
        run_identity_grid("triple", 2, {"E": [1]}, jobs=0)


@pytest.mark.parametrize("top", [-7, -1, 0, 3, 12])
def test_integer_binomial_matches_falling_product(top):
    for k in range(0, 9):
        falling = Fraction(1)
        for i in range(k):
            falling *= top - i
        assert binom(top, k) == falling / factorial(k)


def test_fixed_variables_skip_the_degree_bound():
    grid = {"y": [1, 2, 3, 4, 5], "z": [1, 2, 3, 4, 5]}
    report = run_identity_grid("zagier", 2, grid, fixed={"a": "1/2"})
    assert report.passed
    assert report.metadata["points"] == 25
    assert report.metadata["fixed"] == {"a": "1/2"}
    assert report.metadata["polynomial_identity_established"] is True


def test_fixed_and_gridded_variable_is_rejected():
    with pytest.raises(ValueError, match="both fixed and gridded"):
        run_identity_grid("zagier", 1, {"a": [1], "y": [1], "z": [1]}, fixed={"a": "1/2"})
