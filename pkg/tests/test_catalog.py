import numpy as np
import pytest

from bryant_lab.catalog import families
from bryant_lab.catalog.registry import build_family, family_parameters, get_descriptor, list_families
from bryant_lab.errors import BadParameter, Inadmissible, UnknownFamily
from bryant_lab.expressions.calculus import residue, schwarzian_from_derivative
from bryant_lab.expressions.rational_map import RationalMap
from bryant_lab.holonomy.gauss_maps import divisor_from_spec
from bryant_lab.linalg.sl2c import det
from conftest import random_disk_points


def test_every_default_parameter_set_has_a_descriptor():
    assert [d.name for d in list_families()] == list(family_parameters)


def test_genus_one_families_are_listed_but_not_buildable():
    descriptor = get_descriptor('genus_one_trinoid')
    assert not descriptor.available
    assert descriptor.to_json()['constructor'] == 'unavailable'
    assert descriptor.expected_type.label() == 'I(-2,-2,-2)'
    with pytest.raises(UnknownFamily):
        build_family('genus_one_trinoid')


def test_unknown_family():
    with pytest.raises(UnknownFamily):
        get_descriptor('helicoid')


def test_build_family_coerces_string_parameters():
    spec = build_family('catenoid_cousin', {'l': '0.6', 'delta': '2'})
    assert spec.params == {'l': 0.6, 'delta': 2, 'b': 0.0}
    assert isinstance(spec.params['delta'], int)
    assert build_family('o_2_2_2_0', {'q': 'none'}).params['q'] is None


def test_build_family_rejects_unknown_parameter():
    with pytest.raises(BadParameter):
        build_family('trinoid', {'mu4': 0.1})


@pytest.mark.parametrize("mus", [(0.9, 0.9, 0.9), (-1.0, -0.3, -0.3)])
def test_inadmissible_trinoids(mus):
    with pytest.raises(Inadmissible):
        families.make_trinoid(*mus)


@pytest.mark.parametrize("name, params", [
    ('catenoid_cousin', {'l': 1.0, 'delta': 1}),
    ('catenoid_cousin', {'l': 0.5, 'delta': 1, 'b': 0.3}),
    ('fournoid', {'a': 1.2}),
    ('o0_2_2', {'mu': 0.5}),
    ('o_1_2_2', {'m': 1}),
    ('o_1_2_2_a', {'case': 1, 'm': 2}),
])
def test_constraint_violations(name, params):
    with pytest.raises(BadParameter):
        build_family(name, params)


def test_unknown_enneper_convention():
    with pytest.raises(ValueError, match="Unsupported convention"):
        families.make_enneper(1.0, convention='halved')


def test_catenoid_initial_frame_is_unimodular():
    for l, delta in ((0.8, 1), (0.3, 2), (1.0, 2)):
        assert det(families.catenoid_lift(l, delta)(1.0)) == pytest.approx(1.0, abs=1e-12)


def test_warped_catenoid_cousin_defaults():
    spec = build_family('warped_catenoid_cousin')
    assert spec.name == 'warped_catenoid_cousin'
    assert spec.metadata['reducibility'] == 'H3'


def test_equal_angle_trinoid_metadata(trinoid):
    umbilics = [complex(*u) for u in trinoid.metadata['umbilics']]
    expected = sorted([0.5 + 0.5j * np.sqrt(3), 0.5 - 0.5j * np.sqrt(3)], key=lambda w: w.imag)
    assert np.allclose(sorted(umbilics, key=lambda w: w.imag), expected)
    assert trinoid.metadata['signature'] == '(+,+,+)'
    assert trinoid.metadata['expected_ta_over_pi'] == pytest.approx(6.2)


def test_stated_curvature_discrepancy_is_recorded():
    meta = families.make_o_2_4(-0.5).metadata
    assert meta['expected_ta_over_pi'] == 8.0
    assert meta['stated_ta_over_pi'] == pytest.approx(6.0)
    assert meta['discrepancies']


@pytest.mark.parametrize("name", ['enneper', 'catenoid_cousin', 'trinoid', 'fournoid', 'o0_2_2', 'o_2_4'])
def test_divisor_matches_the_expected_type(name):
    spec = build_family(name)
    expected = get_descriptor(name).expected_type
    assert sorted(divisor_from_spec(spec).orders()) == sorted(expected.orders)


@pytest.mark.parametrize("spec", [
    families.make_o_1_2_2(-0.5, 2),
    families.make_o_2_4(-0.5),
    families.make_o_2_5(-0.5),
    families.make_o_2_2_2_0(-0.75),
], ids=['o_1_2_2', 'o_2_4', 'o_2_5', 'o_2_2_2_0'])
def test_apexes_have_no_residue(spec):
    for apex in spec.metadata['apexes']:
        apex = complex(*apex) if isinstance(apex, list) else complex(apex)
        value, _ = residue(spec.data.gprime, apex)
        assert abs(value) <= 1e-10


def test_consistent_values_of_q_squared():
    candidates = families.solve_o_2_2_2_0(-0.75)
    assert len(candidates) == 2
    for q2 in candidates:
        _, residual = families.o_2_2_2_0_relations(-0.75, q2)
        assert abs(residual) <= 1e-9


def test_inconsistent_q_is_rejected():
    with pytest.raises(BadParameter, match="relations conflict"):
        families.make_o_2_2_2_0(-0.75, q=0.5)


def test_schwarzian_links_both_gauss_maps(rng):
    spec = families.make_o0_2_2(-0.5, 1)
    G = RationalMap.from_json(spec.metadata['G'])
    s_g = schwarzian_from_derivative(spec.data.gprime)
    s_G = schwarzian_from_derivative(G.derivative_expr())
    avoid = spec.special_points() + spec.tracked_points()
    points = np.array(random_disk_points(rng, 20, radius=1.5, avoid=avoid, margin=0.05))
    lhs = s_g.evaluate(points) - s_G.evaluate(points)
    assert np.allclose(lhs, 2 * spec.hopf().evaluate(points), rtol=1e-9)
