import numpy as np
import pytest

from bryant_lab.catalog import families
from bryant_lab.errors import LoopPlanningFailed, NotDualizable, PathTooClose
from bryant_lab.expressions.branch_expr import path_clearance
from bryant_lab.expressions.calculus import is_infinity
from bryant_lab.holonomy.gauss_maps import divisor_from_spec, extract_gauss_maps, midpoints
from bryant_lab.holonomy.lift import integrate_lift, sample_lift
from bryant_lab.holonomy.monodromy import (conjugated, monodromy, monodromy_rep, single_valued_report,
                                           unitarizability_of, unitarized_frame)
from bryant_lab.holonomy.paths import plan_loop, relation_order, spoke
from bryant_lab.holonomy.surface_spec import (SecondaryData, SurfaceSpec, check_compat, dual_spec,
                                              reducible_deformation)
from bryant_lab.linalg.sl2c import det, su2_defect
from conftest import random_disk_points


def test_horosphere_lift_matches_closed_form(horosphere, rng):
    closed = families.horosphere_lift(1.0)
    for z in random_disk_points(rng, 8, radius=2.0):
        assert np.max(np.abs(integrate_lift(horosphere, [0j, z]) - closed(z))) <= 1e-10


def test_regular_zero_at_the_basepoint_is_allowed():
    # g = z vanishes at the basepoint 0 but is regular there
    spec = families.make_enneper(1.0)
    assert spec.special_points() == []
    assert len(spec.tracked_points()) == 1 and abs(spec.tracked_points()[0]) < 1e-12
    assert spec.branch_points() == []


def test_enneper_lift_and_gauss_maps():
    spec = families.make_enneper(1.0)
    closed = families.enneper_lift(1.0)
    for z in (0.6, 0.5j, -0.4 + 0.7j):
        assert np.max(np.abs(integrate_lift(spec, [0j, z]) - closed(z))) <= 1e-8
    points, frames = sample_lift(spec, [0.1 + 0.1j, 0.7 + 0.3j], max_length=1e-3)
    g, G = extract_gauss_maps(frames)
    mid = midpoints(points)
    assert np.max(np.abs(g - mid)) <= 1e-6
    assert np.max(np.abs(G - np.tanh(mid))) <= 1e-6


def test_enneper_omega_convention_picks_the_closed_form():
    report = families.enneper_omega_convention(1.5)
    assert report['reproduces_closed_form'] == 'closed_form'
    assert report['errors']['stated'] > 1e-3


def test_enneper_dual_lift_is_the_inverse():
    spec = families.make_enneper_dual(1.0)
    closed = families.enneper_dual_lift(1.0)
    for z in (0.5, -0.3 + 0.4j):
        F = integrate_lift(spec, [0j, z])
        assert np.max(np.abs(F - closed(z))) <= 1e-8
        assert np.allclose(F @ families.enneper_lift(1.0)(z), np.eye(2), atol=1e-8)


def test_det_is_conserved(trinoid, rng):
    special = trinoid.special_points()
    clearance = path_clearance(special)
    for z in random_disk_points(rng, 5, radius=1.8, avoid=special, margin=0.1):
        path = spoke(trinoid.basepoint, z, special, clearance, 2 * clearance)
        assert abs(det(integrate_lift(trinoid, path)) - 1) <= 1e-10


def test_path_through_a_puncture_is_rejected(catenoid):
    with pytest.raises(PathTooClose):
        integrate_lift(catenoid, [-1.0 + 0j, 1.0 + 0j])


@pytest.mark.parametrize("l", [0.4, 0.8, 1.6])
def test_catenoid_cousin_monodromy(l):
    spec = families.make_catenoid_cousin(l)
    index = next(i for i, p in enumerate(spec.punctures) if not is_infinity(p))
    M = monodromy(spec, index)
    # in SL(2,C) the trace fixes the eigenvalue pair; the lift only fixes M up to sign
    trace = complex(np.trace(M))
    expected = 2 * np.cos(np.pi * l)
    assert min(abs(trace - expected), abs(trace + expected)) <= 1e-8
    assert abs(det(M) - 1) <= 1e-8
    assert su2_defect(M) <= 1e-8


def test_loops_compose_to_the_identity(trinoid):
    rep = monodromy_rep(trinoid)
    assert rep.relation == relation_order(trinoid)
    distance, _ = rep.product_defect()
    assert distance <= 1e-8
    assert rep.to_json()['loops'] == [0, 1, 2]


@pytest.mark.parametrize("mus", [(-0.3, -0.3, -0.3), (-0.5, -0.2, -0.4), (0.5, 0.5, 0.5)])
def test_trinoid_monodromy_is_unitarizable(mus):
    spec = families.make_trinoid(*mus)
    unitary, rep = unitarizability_of(spec)
    assert unitary.defect <= 1e-6
    assert max(su2_defect(M) for M in conjugated(rep, unitary.conjugator)) <= 1e-6


def test_unitarized_frame_without_conjugator_is_the_initial_frame(trinoid):
    assert np.array_equal(unitarized_frame(trinoid, None), trinoid.initial_frame)


def test_loop_around_unknown_puncture_fails(trinoid):
    with pytest.raises(LoopPlanningFailed):
        monodromy(trinoid, 7)


def test_loop_is_closed(trinoid):
    for index in range(3):
        path = plan_loop(trinoid, index)
        assert path[0] == pytest.approx(path[-1])


def test_single_valued_report_for_dual_data(trinoid):
    report = single_valued_report(trinoid, 0)
    assert report['dF_Finv_change'] <= 1e-8


def test_catenoid_divisor(catenoid):
    divisor = divisor_from_spec(catenoid)
    assert divisor.orders() == (-2, -2)
    assert [end.mu for end in divisor.ends] == pytest.approx([-0.2, -0.2])
    assert [end.mu_sharp for end in divisor.ends] == [0, 0]
    assert divisor.umbilics == ()


def test_trinoid_divisor(trinoid):
    divisor = divisor_from_spec(trinoid)
    assert divisor.orders() == (-2, -2, -2)
    assert [end.mu for end in divisor.ends] == pytest.approx([-0.3, -0.3, -0.3], abs=1e-9)
    assert sorted(divisor.umbilics) == [1, 1]


def test_trinoid_data_is_compatible(trinoid):
    report = check_compat(trinoid.data.G, trinoid.hopf(), trinoid.punctures)
    assert report['compatible']


def test_dual_of_enneper_swaps_the_gauss_maps():
    spec = families.make_enneper(1.0)
    dual = dual_spec(spec)
    assert dual.mode == 'dual'
    assert dual.data.G(0.3 + 0.2j) == pytest.approx(0.3 + 0.2j)
    assert dual.hopf()(0.5) == pytest.approx(-spec.hopf()(0.5))
    z = 0.4 - 0.2j
    assert np.allclose(integrate_lift(dual, [0j, z]), np.linalg.inv(families.enneper_lift(1.0)(z)), atol=1e-8)


def test_multivalued_secondary_map_has_no_dual(catenoid):
    data = SecondaryData(catenoid.data.gprime, catenoid.data.omega, catenoid.data.g_base, None)
    with pytest.raises(NotDualizable):
        dual_spec(catenoid.with_params(data=data))


def test_reducible_deformation_keeps_the_hopf_differential():
    spec = families.make_o0_2_2(-0.5, 1)
    deformed = reducible_deformation(spec, 2.5)
    for z in (0.3 + 0.4j, -0.6 + 0.1j):
        assert deformed.hopf()(z) == pytest.approx(spec.hopf()(z))
        assert deformed.data.g_expr(z) == pytest.approx(2.5 * spec.data.g_expr(z))


def test_spec_json_round_trip_gives_the_same_lift(trinoid):
    restored = SurfaceSpec.from_json(trinoid.to_json())
    z = trinoid.basepoint + 0.05
    assert np.allclose(integrate_lift(restored, [trinoid.basepoint, z]),
                       integrate_lift(trinoid, [trinoid.basepoint, z]))
