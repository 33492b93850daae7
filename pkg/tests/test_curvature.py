import numpy as np
import pytest

from bryant_lab.catalog import families
from bryant_lab.classification.surface_type import DivisorData, EndData
from bryant_lab.curvature.quadrature import ta_quadrature
from bryant_lab.curvature.total_curvature import (inequality_report, q_first_coefficient, ta_gauss_bonnet,
                                                  uy3_conditions)
from bryant_lab.errors import InvalidDivisor
from bryant_lab.holonomy.gauss_maps import divisor_from_spec


def test_gauss_bonnet_for_catalog_surfaces(catenoid, trinoid, horosphere):
    assert ta_gauss_bonnet(divisor_from_spec(catenoid)) / np.pi == pytest.approx(3.2)
    assert ta_gauss_bonnet(divisor_from_spec(catenoid), 'dual') / np.pi == pytest.approx(4.0)
    assert ta_gauss_bonnet(divisor_from_spec(trinoid)) / np.pi == pytest.approx(6.2)
    assert ta_gauss_bonnet(divisor_from_spec(trinoid), 'dual') / np.pi == pytest.approx(8.0)
    assert ta_gauss_bonnet(divisor_from_spec(horosphere)) == 0.0


def test_gauss_bonnet_from_a_divisor():
    divisor = DivisorData(0, (EndData(-2, 0.5, 0.0), EndData(-2, 0.5, 0.0)))
    assert ta_gauss_bonnet(divisor) == pytest.approx(6 * np.pi)
    assert ta_gauss_bonnet(divisor, 'dual') == pytest.approx(4 * np.pi)


@pytest.mark.parametrize("divisor", [
    DivisorData(0, (EndData(-2, 0.5, 0.0), EndData(-2, 0.5, 0.0)), umbilics=(1,)),
    DivisorData(0, (EndData(-2, -1.0, 0.0), EndData(-2, 0.5, 0.0))),
])
def test_invalid_divisors(divisor):
    with pytest.raises(InvalidDivisor):
        ta_gauss_bonnet(divisor)


def test_unknown_gauss_map(catenoid):
    with pytest.raises(ValueError, match="Unsupported Gauss map"):
        ta_gauss_bonnet(divisor_from_spec(catenoid), 'sideways')
    with pytest.raises(ValueError, match="Unsupported Gauss map"):
        ta_quadrature(catenoid, 'sideways')


def test_trinoid_inequalities(trinoid):
    divisor = divisor_from_spec(trinoid)
    report = inequality_report(divisor, ta_gauss_bonnet(divisor), ta_gauss_bonnet(divisor, 'dual'))
    assert report['cohn_vossen']['holds']
    assert report['osserman']['equality']
    assert report['osserman']['all_ends_embedded']
    assert report['osserman']['equality_consistent']
    assert report['odd_ends']['m'] == 1
    assert report['odd_ends']['holds']


def test_inequalities_do_not_apply_to_the_horosphere(horosphere):
    assert not inequality_report(divisor_from_spec(horosphere), 0.0, 0.0)['applicable']


def test_trinoid_data_satisfies_the_surface_conditions(trinoid):
    report = uy3_conditions(trinoid)
    assert report['metric_single_valued']
    assert report['hopf_holomorphic']
    assert report['satisfied']


@pytest.mark.parametrize("fixture, j, expected", [('catenoid', 0, 0.18), ('trinoid', 0, 0.255)])
def test_hopf_leading_coefficient(request, fixture, j, expected):
    report = q_first_coefficient(request.getfixturevalue(fixture), j)
    assert report['c'] == pytest.approx(expected, abs=1e-8)
    assert report['residual'] <= 1e-8


def test_leading_coefficient_needs_a_regular_end():
    with pytest.raises(InvalidDivisor):
        q_first_coefficient(families.make_enneper(1.0), 0)


def test_quadrature_of_a_totally_umbilic_surface(horosphere):
    assert ta_quadrature(horosphere)['value'] == 0.0


@pytest.mark.slow
def test_quadrature_matches_gauss_bonnet(catenoid, trinoid):
    assert ta_quadrature(catenoid)['value_over_pi'] == pytest.approx(3.2, rel=0.01)
    assert ta_quadrature(trinoid)['value_over_pi'] == pytest.approx(6.2, rel=0.01)
    assert ta_quadrature(trinoid, 'dual')['value_over_pi'] == pytest.approx(8.0, rel=0.01)


@pytest.mark.slow
def test_quadrature_flags_an_irregular_end():
    result = ta_quadrature(families.make_enneper(1.0), 'dual')
    assert result['divergent']
    assert result['value'] == np.inf
