import numpy as np
import pytest
import sympy as sp

from bryant_lab.errors import BadParameter, LogarithmicTerm, NonIntegerExponent, PathTooClose
from bryant_lab.expressions.branch_expr import BranchExpr, eval_continued
from bryant_lab.expressions.calculus import (continue_primitive, local_exponent, moebius_invariance_check, residue,
                                             residue_at_infinity, schwarzian_from_derivative, taylor_coeffs)
from bryant_lab.expressions.rational_map import INFINITY, RationalMap
from conftest import random_disk_points

z = sp.symbols('z')


def _sympy_values(expr, points):
    f = sp.lambdify(z, expr, 'numpy')
    return np.array([complex(f(p)) for p in points])


def test_evaluate_and_differentiate_match_sympy(rng):
    # (z - 1)^2 (z + 2)^-1 + 3 z^3
    e = BranchExpr.monomial(1.0, [(1.0, 2), (-2.0, -1)]) + BranchExpr.monomial(3.0, [(0j, 3)])
    oracle = (z - 1) ** 2 / (z + 2) + 3 * z ** 3
    points = random_disk_points(rng, 20, radius=1.5, avoid=[-2.0])
    assert np.allclose(e.evaluate(np.array(points)), _sympy_values(oracle, points), rtol=1e-12)
    assert np.allclose(e.differentiate().evaluate(np.array(points)),
                       _sympy_values(sp.diff(oracle, z), points), rtol=1e-12)


def test_terms_must_share_a_branch_class():
    with pytest.raises(BadParameter):
        BranchExpr.monomial(1.0, [(0j, 0.5)]) + BranchExpr.monomial(1.0, [(0j, 0.25)])


def test_square_root_changes_sign_around_its_branch_point():
    root = BranchExpr.monomial(1.0, [(0j, 0.5)])
    circle = [np.exp(2j * np.pi * k / 64) for k in range(65)]
    value, state = eval_continued(root, circle)
    assert value == pytest.approx(-1.0, abs=1e-12)
    assert state.windings(state.start(1.0, state.points))[0j] == pytest.approx(1.0)


def test_path_starting_on_a_singular_point_is_rejected():
    e = BranchExpr.monomial(1.0, [(0j, -1)])
    with pytest.raises(PathTooClose):
        eval_continued(e, [1e-9, 1.0])


def test_residue_of_simple_and_double_pole():
    e = BranchExpr.monomial(3.0, [(1.0, -1)]) + BranchExpr.monomial(2.0, [(1.0, -2)])
    value, error = residue(e, 1.0)
    assert value == pytest.approx(3.0, abs=1e-10)
    assert error < 1e-8


def test_residue_at_infinity_of_one_over_z():
    value, _ = residue_at_infinity(BranchExpr.monomial(1.0, [(0j, -1)]))
    assert value == pytest.approx(-1.0, abs=1e-10)


def test_residue_needs_integer_exponents():
    with pytest.raises(NonIntegerExponent):
        residue(BranchExpr.monomial(1.0, [(0j, -0.5)]), 0j)


def test_taylor_coefficients_match_sympy():
    # 1 / (1 - z)^2 = sum (k + 1) z^k
    e = BranchExpr.monomial(1.0, [(1.0, -2)])
    coeffs, _ = taylor_coeffs(e, 0j, 6)
    series = sp.series(1 / (1 - z) ** 2, z, 0, 6).removeO()
    expected = [complex(series.coeff(z, k)) for k in range(6)]
    assert np.allclose(coeffs, expected, atol=1e-10)


@pytest.mark.parametrize("point, weight, expected", [
    (0j, 0, 2),
    (1.0, 0, 1),
    (INFINITY, 0, -3),
    (INFINITY, 1, -5),
])
def test_local_exponent(point, weight, expected):
    e = BranchExpr.monomial(1.0, [(0j, 2), (1.0, 1)])
    assert local_exponent(e, point, weight=weight) == expected


def test_local_exponent_sees_cancellation():
    # z^2 (z - 1) + z^2 = z^3
    e = BranchExpr.monomial(1.0, [(0j, 2), (1.0, 1)]) + BranchExpr.monomial(1.0, [(0j, 2)])
    assert local_exponent(e, 0j) == 3


def test_schwarzian_matches_sympy(rng):
    g = z ** 3 + z
    oracle = sp.diff(g, z, 3) / sp.diff(g, z) - sp.Rational(3, 2) * (sp.diff(g, z, 2) / sp.diff(g, z)) ** 2
    gprime = BranchExpr.from_polynomial([1.0, 0.0, 3.0])
    points = random_disk_points(rng, 10, radius=1.0, avoid=[1j / np.sqrt(3), -1j / np.sqrt(3)])
    values = schwarzian_from_derivative(gprime).evaluate(np.array(points))
    assert np.allclose(values, _sympy_values(oracle, points), rtol=1e-10)


def test_schwarzian_of_a_power():
    # S(g) for g = z^a is (1 - a^2) / (2 z^2)
    a = 0.7
    gprime = BranchExpr.monomial(a, [(0j, a - 1)])
    values = schwarzian_from_derivative(gprime).evaluate(np.array([0.5, 1.0 + 1j]))
    assert np.allclose(values, (1 - a ** 2) / (2 * np.array([0.5, 1.0 + 1j]) ** 2))


@pytest.mark.parametrize("oracle, gprime, poles", [
    # g = (z - 1) / (z + 2)^2 + z^3, double pole at -2
    ((z - 1) / (z + 2) ** 2 + z ** 3,
     BranchExpr.monomial(1.0, [(-2.0, -2)]) + BranchExpr.monomial(-2.0, [(1.0, 1), (-2.0, -3)])
     + BranchExpr.monomial(3.0, [(0j, 2)]),
     [-2.0]),
    # g = z^-2 + z
    (z ** -2 + z, BranchExpr.monomial(-2.0, [(0j, -3)]) + BranchExpr.constant(1.0), [0j]),
])
def test_schwarzian_of_rational_maps_matches_sympy(rng, oracle, gprime, poles):
    d1 = sp.diff(oracle, z)
    s = sp.diff(oracle, z, 3) / d1 - sp.Rational(3, 2) * (sp.diff(oracle, z, 2) / d1) ** 2
    critical = [complex(r) for r in sp.Poly(sp.numer(sp.together(d1)), z).nroots()]
    points = random_disk_points(rng, 12, radius=2.5, avoid=poles + critical, margin=0.2)
    values = schwarzian_from_derivative(gprime).evaluate(np.array(points))
    assert np.allclose(values, _sympy_values(s, points), rtol=1e-8)


def test_continue_primitive_follows_the_square_root_around_zero():
    gprime = BranchExpr.monomial(0.5, [(0j, -0.5)])
    path = np.exp(1j * np.pi * np.arange(13) / 6)
    values, _ = continue_primitive(gprime, path, g0=1.0)
    assert values[6] == pytest.approx(1j, abs=1e-10)
    assert values[-1] == pytest.approx(-1.0, abs=1e-10)


def test_moebius_invariance_holds_across_the_branch_cut():
    gprime = BranchExpr.monomial(0.5, [(0j, -0.5)])
    samples = np.exp(1j * np.pi * np.arange(1, 11) / 6)
    a = np.array([[1.0, 2.0], [0.5, 3.0]])
    assert moebius_invariance_check(gprime, a, samples, g0=1.0, base=1.0)


def test_moebius_invariance_fails_with_a_pole_inside_the_circle():
    # g = z^2 and a*g = 1 / (g - 0.3025) has a pole 0.05 from the sample
    gprime = BranchExpr.monomial(2.0, [(0j, 1)])
    a = np.array([[0.0, 1.0], [1.0, -0.3025]])
    assert not moebius_invariance_check(gprime, a, [0.5], g0=0.25)


def test_rational_map_branching():
    G = RationalMap.power(3)
    assert G.degree() == 3
    assert G.branching_order(0j) == 2
    assert G.branching_order(INFINITY) == 2
    assert sorted(order for _, order in G.branch_points()) == [2, 2]


def test_rational_map_star_is_moebius_post_composition():
    G = RationalMap([1.0, 1.0], [0.0, 1.0])
    a = np.array([[2.0, 1.0], [1.0, 1.0]])
    w = 0.3 + 0.4j
    g = G(w)
    assert G.star(a)(w) == pytest.approx((2 * g + 1) / (g + 1))


def test_from_derivative_integrates_principal_parts():
    dG = BranchExpr.monomial(1.0, [(1.0, -2)]) + BranchExpr.constant(2.0)
    G = RationalMap.from_derivative(dG, constant=0.5)
    for w in (0.2, 2.0 + 1j, -3.0):
        assert G(w) == pytest.approx(-1 / (w - 1) + 2 * w + 0.5, abs=1e-9)


def test_from_derivative_rejects_a_residue():
    with pytest.raises(LogarithmicTerm):
        RationalMap.from_derivative(BranchExpr.monomial(1.0, [(0j, -1)]))
