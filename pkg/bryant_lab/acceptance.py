import logging
import time

import numpy as np

from bryant_lab.catalog import families
from bryant_lab.classification.enumeration import enumerate_types, type_labels
from bryant_lab.classification.nonexistence import PROPOSITIONS, verify_nonexistence
from bryant_lab.config.settings import DEFAULT_SEED
from bryant_lab.curvature.quadrature import ta_quadrature
from bryant_lab.curvature.total_curvature import ta_gauss_bonnet
from bryant_lab.experimentation.period_optimiser import PeriodProblem, solve
from bryant_lab.expressions.branch_expr import path_clearance
from bryant_lab.expressions.calculus import is_infinity, residue, schwarzian_from_derivative
from bryant_lab.expressions.rational_map import RationalMap
from bryant_lab.holonomy.gauss_maps import divisor_from_spec
from bryant_lab.holonomy.lift import integrate_lift
from bryant_lab.holonomy.monodromy import monodromy, unitarizability_of
from bryant_lab.holonomy.paths import spoke
from bryant_lab.linalg.sl2c import det, su2_defect
from bryant_lab.meshing.mesh import MeshGrid, sample_surface

logger = logging.getLogger(__name__)

FOUR_PI_TYPES = ['O(-2,-2)', 'O(-4)', 'O(0)']


def _result(name, passed, value, threshold, started):
    return {
        'name': name,
        'passed': bool(passed),
        'value': value,
        'threshold': threshold,
        'seconds': round(time.perf_counter() - started, 3),
    }


def _random_points(rng, count, radius, avoid, margin):
    points = []
    while len(points) < count:
        z = radius * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        if all(abs(z - p) > margin for p in avoid if not is_infinity(p)):
            points.append(complex(z))
    return points


def check_horosphere_lift(rng):
    started = time.perf_counter()
    spec = families.make_horosphere(1.0)
    closed = families.horosphere_lift(1.0)
    error = max(float(np.max(np.abs(integrate_lift(spec, [0j, z]) - closed(z))))
                for z in _random_points(rng, 12, 2.0, (), 0.0))
    return _result('horosphere lift', error <= 1e-10, error, 1e-10, started)


def check_det_conservation(rng, paths=20):
    started = time.perf_counter()
    worst = 0.0
    for spec in (families.make_catenoid_cousin(0.8), families.make_trinoid(-0.3, -0.3, -0.3)):
        special = spec.special_points()
        clearance = path_clearance(special)
        for z in _random_points(rng, paths // 2, 1.8, special, 0.1):
            path = spoke(spec.basepoint, z, special, clearance, 2 * clearance)
            worst = max(worst, float(abs(det(integrate_lift(spec, path)) - 1)))
    return _result('det conservation', worst <= 1e-10, worst, 1e-10, started)


def check_enneper(rng):
    started = time.perf_counter()
    report = families.enneper_omega_convention(1.0)
    passed = report['reproduces_closed_form'] == 'closed_form' and report['max_error'] <= 1e-8
    return _result('Enneper cousin lift', passed, report['max_error'], 1e-8, started)


def check_catenoid_monodromy(rng):
    started = time.perf_counter()
    worst = 0.0
    for l in (0.4, 0.8, 1.6):
        spec = families.make_catenoid_cousin(l)
        index = next(i for i, p in enumerate(spec.punctures) if not is_infinity(p))
        M = monodromy(spec, index)
        trace = complex(np.trace(M))
        expected = 2 * np.cos(np.pi * l)
        eig_error = min(abs(trace - expected), abs(trace + expected))
        worst = max(worst, eig_error, su2_defect(M))
    return _result('catenoid cousin monodromy', worst <= 1e-8, worst, 1e-8, started)


def check_schwarzian(rng):
    started = time.perf_counter()
    worst = 0.0
    for spec in (families.make_o0_2_2(-0.5, 1), families.make_o_1_2_2(-0.5, 2)):
        G = RationalMap.from_json(spec.metadata['G'])
        s_g = schwarzian_from_derivative(spec.data.gprime)
        s_G = schwarzian_from_derivative(G.derivative_expr())
        Q = spec.hopf()
        for z in _random_points(rng, 100, 1.5, spec.special_points() + spec.tracked_points(), 0.05):
            lhs = s_g.evaluate(z) - s_G.evaluate(z)
            rhs = 2 * Q.evaluate(z)
            worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    return _result('Schwarzian identity', worst <= 1e-9, worst, 1e-9, started)


def check_gauss_bonnet(rng):
    started = time.perf_counter()
    catenoid = ta_gauss_bonnet(divisor_from_spec(families.make_catenoid_cousin(0.8)))
    trinoid = divisor_from_spec(families.make_trinoid(-0.3, -0.3, -0.3))
    errors = [abs(catenoid / np.pi - 3.2),
              abs(ta_gauss_bonnet(trinoid) / np.pi - 6.2),
              abs(ta_gauss_bonnet(trinoid, 'dual') / np.pi - 8.0)]
    return _result('Gauss-Bonnet total curvature', max(errors) <= 1e-9, max(errors), 1e-9, started)


def check_trinoid_periods(rng):
    started = time.perf_counter()
    worst = 0.0
    for mus in ((-0.3, -0.3, -0.3), (-0.5, -0.2, -0.4), (0.5, 0.5, 0.5)):
        unitary, _ = unitarizability_of(families.make_trinoid(*mus))
        worst = max(worst, unitary.defect)
    return _result('trinoid period closure', worst <= 1e-6, worst, 1e-6, started)


def check_enumeration(rng):
    started = time.perf_counter()
    labels = type_labels(enumerate_types(2))
    return _result('TA <= 4 pi enumeration', labels == FOUR_PI_TYPES, labels, FOUR_PI_TYPES, started)


def check_nonexistence(rng):
    started = time.perf_counter()
    failed = [key for key in PROPOSITIONS if not verify_nonexistence(key)['holds']]
    return _result('nonexistence verifiers', not failed, failed, [], started)


def check_residues(rng):
    started = time.perf_counter()
    specs = (families.make_o_1_2_2(-0.5, 2), families.make_o_1_2_2_a(1, -0.5, 3), families.make_o_2_4(-0.5),
             families.make_o_2_5(-0.5), families.make_o_2_2_2_0(-0.75))
    worst = 0.0
    for spec in specs:
        for apex in spec.metadata.get('apexes', []):
            apex = complex(*apex) if isinstance(apex, (list, tuple)) else complex(apex)
            value, _ = residue(spec.data.gprime, apex)
            worst = max(worst, abs(value))
    return _result('apex residues', worst <= 1e-10, worst, 1e-10, started)


def check_quadrature(rng):
    started = time.perf_counter()
    catenoid = ta_quadrature(families.make_catenoid_cousin(0.8))['value_over_pi']
    trinoid = families.make_trinoid(-0.3, -0.3, -0.3)
    errors = [abs(catenoid - 3.2) / 3.2,
              abs(ta_quadrature(trinoid, 'dual')['value_over_pi'] - 8.0) / 8.0,
              abs(ta_quadrature(trinoid)['value_over_pi'] - 6.2) / 6.2]
    return _result('quadrature total curvature', max(errors) <= 0.01, max(errors), 0.01, started)


def check_fournoid(rng):
    started = time.perf_counter()
    result = solve(PeriodProblem('fournoid', 'p', (1.0, 2.0), {'mu': -0.5, 'a': 0.8}))
    passed = 1.3 <= result['root'] <= 1.5 and result['defect'] <= 1e-6
    return _result('4-noid period solve', passed, result['root'], [1.3, 1.5], started)


def check_mesh_symmetry(rng):
    started = time.perf_counter()
    spec = families.make_catenoid_cousin(0.8)
    sample = sample_surface(spec, MeshGrid.annulus(0j, 0.3, 1.5, 8, 33))
    inside = bool(np.all(np.linalg.norm(sample.points[sample.mask], axis=-1) < 1))
    spread = 0.0
    for i in range(sample.grid.shape[0]):
        ring = sample.points[i][sample.mask[i]]
        if len(ring):
            radii = np.linalg.norm(ring[:, :2], axis=-1)
            spread = max(spread, float(np.ptp(radii)), float(np.ptp(ring[:, 2])))
    return _result('catenoid mesh symmetry', inside and spread <= 1e-6, spread, 1e-6, started)


FAST_CHECKS = (check_horosphere_lift, check_det_conservation, check_enneper, check_catenoid_monodromy,
               check_schwarzian, check_gauss_bonnet, check_trinoid_periods, check_enumeration,
               check_nonexistence, check_residues)
FULL_CHECKS = (check_quadrature, check_fournoid, check_mesh_symmetry)


def run_checks(full=False, seed=DEFAULT_SEED):
    """Run the acceptance checks; a check that raises counts as failed and the rest still run."""
    rng = np.random.default_rng(seed)
    results = []
    for check in FAST_CHECKS + (FULL_CHECKS if full else ()):
        started = time.perf_counter()
        try:
            results.append(check(rng))
        except Exception as error:
            logger.exception("check %s raised", check.__name__)
            results.append(_result(check.__name__, False, f"{type(error).__name__}: {error}", None, started))
        logger.info("%s: %s", results[-1]['name'], 'pass' if results[-1]['passed'] else 'FAIL')
    passed = sum(r['passed'] for r in results)
    return {'seed': seed, 'full': full, 'passed': passed, 'failed': len(results) - passed, 'checks': results}
