import logging

import numpy as np

from bryant_lab.errors import InvalidDivisor
from bryant_lab.expressions.branch_expr import same_point
from bryant_lab.expressions.calculus import is_infinity, local_exponent
from bryant_lab.expressions.rational_map import INFINITY
from bryant_lab.holonomy.gauss_maps import divisor_from_spec, second_order_coefficient
from bryant_lab.holonomy.monodromy import unitarizability_of
from bryant_lab.holonomy.surface_spec import _point_to_json, check_compat

logger = logging.getLogger(__name__)

WHICH = ('primal', 'dual')
EMBEDDED_TOL = 1e-9


def _check_which(which):
    if which not in WHICH:
        raise ValueError(f"Unsupported Gauss map {which}. Choose one of {WHICH}.")


def _validate(divisor):
    expected = 4 * divisor.genus - 4
    if divisor.total_order() != expected:
        raise InvalidDivisor(f"Sum of end and umbilic orders is {divisor.total_order()}, expected {expected}")
    for j, end in enumerate(divisor.ends):
        if np.isnan(end.mu) or np.isnan(end.mu_sharp):
            raise InvalidDivisor(f"End {j} has an undefined conical order")
        if end.mu <= -1:
            raise InvalidDivisor(f"End {j} has conical order {end.mu} <= -1")


def ta_gauss_bonnet(divisor, which='primal'):
    """Total absolute curvature of f (primal) or of its dual f# from the divisor.

    TA/2pi = 2 - 2 genus + sum(mu_j) + sum(xi_k), with mu# in place of mu for the dual.
    """
    _check_which(which)
    if divisor.totally_umbilic:
        return 0.0
    _validate(divisor)
    orders = [end.mu if which == 'primal' else end.mu_sharp for end in divisor.ends]
    if any(np.isinf(float(o)) for o in orders):
        return float(np.inf)
    return float(2 * np.pi * (2 - 2 * divisor.genus + sum(orders) + sum(divisor.umbilics)))


def rational_degree(G):
    return G.degree()


def _embedded(end):
    return end.d == -2 and not np.isinf(float(end.mu_sharp)) and abs(float(end.mu_sharp)) <= EMBEDDED_TOL


def inequality_report(divisor, ta, ta_dual):
    """Cohn-Vossen, Osserman-type and odd-end bounds for the given TA and dual TA."""
    if divisor.totally_umbilic:
        return {'applicable': False, 'reason': 'totally umbilic'}
    genus, n = divisor.genus, divisor.n
    cohn_vossen = (n - 2 + 2 * genus) * 2 * np.pi
    osserman = 2 * (genus + n - 1) * 2 * np.pi
    all_embedded = all(_embedded(end) for end in divisor.ends)
    report = {
        'applicable': True,
        'cohn_vossen': {'bound': cohn_vossen, 'margin': ta - cohn_vossen, 'holds': bool(ta > cohn_vossen)},
        'osserman': {
            'bound': osserman,
            'margin': ta_dual - osserman,
            'holds': bool(ta_dual >= osserman - 1e-9 * max(1.0, osserman)),
            'equality': bool(np.isclose(ta_dual, osserman, rtol=1e-9)),
            'all_ends_embedded': all_embedded,
        },
    }
    report['osserman']['equality_consistent'] = report['osserman']['equality'] == all_embedded
    if genus == 0 and n % 2 == 1:
        m = (n - 1) // 2
        bound = 4 * np.pi * m
        report['odd_ends'] = {'m': m, 'bound': bound, 'margin': ta - bound,
                              'holds': bool(ta >= bound - 1e-9 * max(1.0, bound))}
    else:
        report['odd_ends'] = None
    return report


def _is_end(spec, p):
    for q in spec.punctures:
        if is_infinity(p) and is_infinity(q):
            return True
        if not is_infinity(p) and not is_infinity(q) and same_point(p, q, 1e-9):
            return True
    return False


def _interior_points(spec):
    points = [p for p in spec.tracked_points() if not _is_end(spec, p)]
    if not spec.has_infinite_end():
        points.append(INFINITY)
    return points


def uy3_conditions(spec, jobs=1):
    """The three conditions under which (g, G) with Q = (S(g) - S(G))/2 come from a CMC-1 surface."""
    unitary, _ = unitarizability_of(spec, jobs=jobs)
    single_valued = unitary.conjugator is not None
    Q = spec.hopf()
    poles = []
    for p in _interior_points(spec):
        order = local_exponent(Q, p, weight=2)
        if order < 0:
            poles.append({'point': _point_to_json(p), 'ord_Q': order})
    if spec.mode == 'dual':
        report = check_compat(spec.data.G, Q, spec.punctures)
        mismatches = report['condition1']
    else:
        mismatches = []
        gprime = spec.data.gprime
        for p in _interior_points(spec):
            order = local_exponent(Q, p, weight=2)
            exponent = local_exponent(gprime, p, weight=1)
            branching = abs(exponent + 1) - 1
            if not np.isclose(order, branching):
                mismatches.append({'point': _point_to_json(p), 'ord_Q': order, 'branching': branching})
    logger.info("conditions for %s: defect %.3e, %d pole(s), %d mismatch(es)",
                spec.name, unitary.defect, len(poles), len(mismatches))
    return {
        'metric_single_valued': single_valued,
        'unitarizability_defect': unitary.defect,
        'hopf_holomorphic': not poles,
        'hopf_poles': poles,
        'metric_nondegenerate': not mismatches,
        'order_mismatches': mismatches,
        'satisfied': bool(single_valued and not poles and not mismatches),
    }


def q_first_coefficient(spec, j):
    """c_j, twice the (z - p_j)^-2 coefficient of Q, against -mu(mu+2)/2 + mu#(mu#+2)/2."""
    divisor = divisor_from_spec(spec)
    end = divisor.ends[j]
    if end.d <= -3:
        raise InvalidDivisor(f"End {j} is irregular (ord Q = {end.d})")
    c = 2 * second_order_coefficient(spec.hopf(), spec.punctures[j])
    mu, mu_sharp = float(end.mu), float(end.mu_sharp)
    expected = -0.5 * mu * (mu + 2) + 0.5 * mu_sharp * (mu_sharp + 2)
    return {'c': c, 'expected': expected, 'residual': abs(c - expected), 'd': end.d, 'mu': mu,
            'mu_sharp': mu_sharp}
