import numpy as np
import pytest

from bryant_lab.classification.enumeration import IMPOSSIBLE, enumerate_types, general_class_bounds, type_labels
from bryant_lab.classification.facts import facts_check
from bryant_lab.classification.frobenius import FrobeniusProblem, log_term_coefficient
from bryant_lab.classification.nonexistence import (PROPOSITIONS, o0_2_3_case1_solutions, o0_2_3_case2_resultant,
                                                    o0_2_3_problem, o1_2_3_apexes, o1_2_3_log_term,
                                                    phi_boundary_values, phi_certificate, two_end_certificate,
                                                    verify_nonexistence)
from bryant_lab.classification.reducibility import canonical_dg, reducibility_classify
from bryant_lab.classification.surface_type import DivisorData, EndData, SurfaceType
from bryant_lab.errors import BadParameter, GridTooCoarse, UnsupportedBound
from bryant_lab.expressions.branch_expr import BranchExpr
from bryant_lab.holonomy.gauss_maps import divisor_from_spec


def test_types_below_four_pi():
    types = enumerate_types(2)
    assert type_labels(types) == ['O(-2,-2)', 'O(-4)', 'O(0)']
    assert [t.label() for t in types].count('O(-2,-2)') == 2


def test_excluded_types_are_listed_only_on_request():
    assert 'O(-2,-3)' not in type_labels(enumerate_types(2))
    excluded = [t for t in enumerate_types(2, include_excluded=True) if t.status == 'impossible']
    assert [t.label() for t in excluded] == ['O(-2,-3)']


def test_types_below_eight_pi_include_the_excluded_ones():
    types = enumerate_types(4, include_excluded=True)
    by_label = {}
    for t in types:
        by_label.setdefault(t.label(), []).append(t)
    for label in IMPOSSIBLE:
        assert [t.status for t in by_label[label]] == ['impossible']
    assert 'existence' in {t.status for t in by_label['O(-2,-2,-2)']}


def test_enumeration_filters_by_genus():
    labels = type_labels(enumerate_types(4, genus=1))
    assert labels
    assert all(label.startswith('I(') for label in labels)


@pytest.mark.parametrize("rho", [0, 5])
def test_unsupported_bound(rho):
    with pytest.raises(UnsupportedBound):
        enumerate_types(rho)


def test_class_bounds_for_two_ends():
    bounds = general_class_bounds(0, 2, 2)
    assert bounds.budget == 4
    # O(-2,-3) passes the bounds; only a nonexistence argument removes it
    assert bounds.candidate_orders() == [(-1, -3), (-2, -2), (-2, -3)]
    assert 'lemma:sum' in bounds.violations((-1, -1))


def test_class_bounds_reject_high_genus():
    bounds = general_class_bounds(2, 1, 2)
    assert 'lemma:genus' in bounds.violations((4,))
    assert bounds.candidate_orders() == []


def test_surface_type_label_and_validation():
    assert SurfaceType(1, (-2, -3)).label() == 'I(-2,-3)'
    with pytest.raises(ValueError, match="Unsupported reducibility"):
        SurfaceType(0, (-2, -2), reducibility='H2')


def test_catalog_divisor_satisfies_the_facts(catenoid, trinoid):
    assert facts_check(divisor_from_spec(catenoid)) == []
    assert facts_check(divisor_from_spec(trinoid)) == []


def test_facts_flag_a_bad_divisor():
    divisor = DivisorData(0, (EndData(-2, 0.5, 0.5), EndData(-1, -0.5, -0.5)))
    facts = {v['fact'] for v in facts_check(divisor)}
    assert {'a', 'f'} <= facts


@pytest.mark.parametrize("orders, expected", [
    ([1, 2], 'H3'),
    ([0.5, 1, 3], 'impossible'),
    ([0.5, 0.5, 2], 'H1'),
    ([0.5, 0.3, 0.2], 'irreducible-possible'),
])
def test_reducibility_classify(orders, expected):
    assert reducibility_classify(orders) == expected


def test_canonical_dg_with_residue_free_apexes():
    mu = -0.5
    report = canonical_dg([0j, 1 + 0j], [mu, 3.0], list(o1_2_3_apexes(mu)))
    assert report['residue_free']
    for row in report['residues']:
        assert abs(row['closed_form']) <= 1e-9


def test_canonical_dg_for_cube_roots_of_unity():
    mu = -0.5
    cube = np.exp(2j * np.pi * np.arange(3) / 3)
    umbilics = list(np.cbrt((mu + 1) / (mu - 2)) * cube)
    report = canonical_dg([0j] + umbilics, [mu, 1.0, 1.0, 1.0], list(cube))
    assert report['residue_free']
    assert report['infinity_exponent'] == pytest.approx(1 - mu)


def test_canonical_dg_reports_a_residue():
    report = canonical_dg([0j], [1.0], [2.0, 3.0])
    assert not report['residue_free']
    assert report['max_residue'] > 1e-3


def test_euler_equation_has_no_log_term():
    # X'' - 2 X / z^2 = 0 has the solutions z^2 and 1/z
    problem = FrobeniusProblem(BranchExpr.constant(1.0), BranchExpr.monomial(2.0, [(0j, -2)]), 0j)
    r1, r2 = problem.indicial_roots()
    assert r1 == pytest.approx(2.0)
    assert r2 == pytest.approx(-1.0)
    assert abs(log_term_coefficient(problem)) <= 1e-10


def test_non_integer_root_difference_is_rejected():
    problem = FrobeniusProblem(BranchExpr.constant(1.0), BranchExpr.monomial(0.3, [(0j, -2)]), 0j)
    with pytest.raises(BadParameter):
        problem.root_difference()


@pytest.mark.parametrize("mu, a, b, q", [(-0.5, 0.3 + 0.2j, -0.7, 2.0), (0.4, 1.5, -0.4 + 0.9j, 0.25)])
def test_log_term_closed_form_for_three_ends(mu, a, b, q):
    value = log_term_coefficient(o0_2_3_problem(mu, a, b, q))
    assert value == pytest.approx(-(mu + 2 - 2 / a - 2 / b), rel=1e-6)


def test_log_term_at_the_order_three_end():
    row = o1_2_3_log_term(-0.5)
    assert row['frobenius'] == pytest.approx(row['closed_form'], rel=1e-6)
    assert row['closed_form'] == pytest.approx(-0.5)


@pytest.mark.parametrize("mu", [-0.9, -0.5, -0.1])
def test_residue_and_log_conditions_collapse(mu):
    solutions = o0_2_3_case1_solutions(mu)
    assert solutions
    expected = 4 / (mu + 2)
    for s in solutions:
        assert s['a'] == pytest.approx(expected, abs=1e-6)
        assert s['b'] == pytest.approx(expected, abs=1e-6)
        assert s['q'] == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("mu", [-0.9, 0.3, 2.5])
def test_second_case_resultant_is_constant(mu):
    assert o0_2_3_case2_resultant(mu) == pytest.approx(2.0)


def test_phi_minimum_for_a_corner_triple():
    assert phi_boundary_values(1, 1, 3)['minimum'] == pytest.approx(np.sqrt(5))
    assert phi_certificate(1, 1, 3)['holds']


def test_phi_grid_too_coarse():
    with pytest.raises(GridTooCoarse):
        phi_certificate(1, 1, 3, grid=3)


@pytest.mark.parametrize("prop_id", list(PROPOSITIONS))
def test_nonexistence_holds(prop_id):
    report = verify_nonexistence(prop_id)
    assert report['holds']
    assert report['type'] == prop_id


def test_unknown_proposition():
    with pytest.raises(ValueError, match="Unsupported type"):
        verify_nonexistence('O(-7)')


def test_two_end_type_with_integral_orders_only():
    report = two_end_certificate((-1, -3))
    assert report['holds']
    assert report['non_integral'] == []
    assert [row['mus'] for row in report['integral']] == [[1, 1]]
    assert not report['integral'][0]['dual_listed']


def test_two_end_type_needs_both_arguments():
    report = two_end_certificate((-3, -2))
    assert report['type'] == 'O(-2,-3)'
    assert report['holds']
    assert all(row['reducibility'] == 'H3' and not row['dual_listed'] for row in report['integral'])
    assert all(row['ruled_out'] for row in report['non_integral'])


def test_two_end_type_with_a_known_dual_is_not_flagged():
    report = two_end_certificate((-1, -4))
    assert not report['holds']
    assert [row['mus'] for row in report['integral']] == [[1, 0]]
    assert report['integral'][0]['dual_listed']
