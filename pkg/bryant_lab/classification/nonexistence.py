import itertools
import logging

import numpy as np
from joblib import Parallel, delayed
from numpy.polynomial import polynomial as P

from bryant_lab.classification.enumeration import (DUAL_EIGHT_PI_ROWS, assess_type, general_class_bounds,
                                                  integral_conical_orders)
from bryant_lab.classification.frobenius import FrobeniusProblem, log_term_coefficient
from bryant_lab.classification.reducibility import canonical_dg, reducibility_classify
from bryant_lab.classification.surface_type import SurfaceType
from bryant_lab.config.settings import classification_config
from bryant_lab.errors import GridTooCoarse
from bryant_lab.expressions.branch_expr import BranchExpr

logger = logging.getLogger(__name__)

MU_SAMPLES = 41
MIN_GRID = 5
SQRT8 = np.sqrt(8.0)


# --- O(0,-2,-3) -----------------------------------------------------------------

def o0_2_3_case1_solutions(mu, tol=None):
    """Solutions (a, b, q) with a, b != 0 of the two apex residue equations and the log-term condition.

    With s = a + b, P = ab the log-term condition reads s = (mu + 2) P / 2; each residue equation is then
    linear in q and equating the two values of q leaves a polynomial in P.
    """
    tol = classification_config['nonexistence_tol'] if tol is None else tol
    c = (mu + 2) / 2
    # q * D1 = N1 from the first residue form, q * D2 = N2 from the second; polynomials in P.
    n1 = P.polyadd([0.0, 2.0 + c + 2 * (mu + 1)], [0.0, 0.0, -(mu + 1) * c * c])
    d1 = np.array([2.0, -mu * c])
    n2 = np.array([0.0, 4.0, -(mu + 1) * c])
    d2 = np.array([0.0, -float(mu)])
    poly = P.polysub(P.polymul(n1, d2), P.polymul(n2, d1))
    # the P^3 terms cancel analytically
    poly = np.where(np.abs(poly) > 1e-12 * np.max(np.abs(poly)), poly, 0.0)
    poly = np.trim_zeros(poly, 'b')
    roots = P.polyroots(poly) if poly.size > 1 else np.array([])
    solutions = []
    for prod in roots:
        if abs(prod) <= tol:
            continue
        s = c * prod
        q = P.polyval(prod, n2) / P.polyval(prod, d2)
        disc = np.sqrt(complex(s * s - 4 * prod))
        a, b = (s + disc) / 2, (s - disc) / 2
        solutions.append({'a': complex(a), 'b': complex(b), 'q': complex(q)})
    return solutions


def _o0_2_3_residuals(mu, a, b, q):
    first = (mu + 1) * (a * a + b * b) - (mu * q + 1) * (a + b) - 2 * a * b + 2 * q
    second = (mu + 1) * (a + b) * a * b - 2 * (mu * q + q + 2) * a * b + 2 * q * (a + b)
    log = mu + 2 - 2 / a - 2 / b
    return abs(first), abs(second), abs(log)


def o0_2_3_case2_resultant(mu):
    """(mu+2)(mu+1) q^2 - 4(mu+1) q + 2 at the log-term root q = 4/(mu+2); identically 2."""
    q = 4 / (mu + 2)
    return (mu + 2) * (mu + 1) * q * q - 4 * (mu + 1) * q + 2


def o0_2_3_problem(mu, a, b, q, theta=1.0, t=1.0):
    """The second order equation at z = 0 for dg = t z^2 (z-1)^mu (z-q) / ((z-a)^2 (z-b)^2), Q = theta (z-q)/(z-1)^2."""
    omega_hat = BranchExpr.monomial(theta / t, [(0j, -2), (1 + 0j, -mu - 2), (complex(a), 2), (complex(b), 2)])
    q_hat = BranchExpr.monomial(theta, [(complex(q), 1), (1 + 0j, -2)])
    return FrobeniusProblem(omega_hat, q_hat, 0j)


def _mu_grid(low, high, samples):
    grid = np.linspace(low, high, samples + 2)[1:-1]
    return [float(mu) for mu in grid if abs(mu - round(mu)) > 1e-6]


def _verify_o0_2_3(grid, jobs):
    tol = classification_config['nonexistence_tol']
    case1 = []
    for mu in _mu_grid(-1.0, 3.0, grid or MU_SAMPLES):
        expected = 4 / (mu + 2)
        solutions = o0_2_3_case1_solutions(mu)
        collapsed = all(abs(s['a'] - s['b']) <= 1e-6 and abs(s['a'] - s['q']) <= 1e-6 and
                        abs(s['a'] - expected) <= 1e-6 for s in solutions)
        residual = max((max(_o0_2_3_residuals(mu, s['a'], s['b'], s['q'])) for s in solutions), default=0.0)
        case1.append({'mu': mu, 'solutions': len(solutions), 'collapsed': bool(collapsed and solutions),
                      'expected': expected, 'max_residual': float(residual)})
    case2 = [{'mu': mu, 'resultant': float(o0_2_3_case2_resultant(mu))}
             for mu in _mu_grid(-1.0, 3.0, grid or MU_SAMPLES)]
    log_checks = []
    for mu, a, b, q in ((-0.5, 0.3 + 0.2j, -0.7, 2.0), (0.4, 1.5, -0.4 + 0.9j, 0.25), (1.7, -2.0, 0.6j, 3.0)):
        value = log_term_coefficient(o0_2_3_problem(mu, a, b, q))
        closed = -(mu + 2 - 2 / a - 2 / b)
        log_checks.append({'mu': mu, 'frobenius': value, 'closed_form': closed,
                           'relative_error': float(abs(value - closed) / max(1.0, abs(closed)))})
    holds = (all(row['collapsed'] and row['max_residual'] <= 1e-6 for row in case1)
             and all(abs(row['resultant']) > tol for row in case2))
    return {'case1': case1, 'case2': case2, 'log_term_checks': log_checks, 'holds': bool(holds),
            'argument': 'the only solution of the residue and log-term equations has a = b = q = 4/(mu+2)'}


# --- O(1,-2,-3) -----------------------------------------------------------------

def o1_2_3_apexes(mu):
    """Apexes a, b making dg = t z^mu (z-1)^3 / ((z-a)^2 (z-b)^2) residue free."""
    root = np.sqrt(2.0) * np.sqrt(complex(2 - mu - mu * mu))
    den = (mu + 1) * (mu + 2)
    base = -2 + mu + mu * mu
    return complex((base + root) / den), complex((base - root) / den)


def o1_2_3_log_term(mu, theta=1.0):
    """Frobenius obstruction at z = 1 for the residue-free data, against the closed form -(mu+2)/3."""
    a, b = o1_2_3_apexes(mu)
    omega_hat = BranchExpr.monomial(theta, [(0j, -mu - 2), (1 + 0j, -2), (a, 2), (b, 2)])
    q_hat = BranchExpr.monomial(theta, [(1 + 0j, 1), (0j, -2)])
    value = log_term_coefficient(FrobeniusProblem(omega_hat, q_hat, 1 + 0j))
    return {'mu': mu, 'a': a, 'b': b, 'frobenius': value, 'closed_form': -(mu + 2) / 3}


def _verify_o1_2_3(grid, jobs):
    tol = classification_config['nonexistence_tol']
    rows = []
    for mu in _mu_grid(-1.0, 0.0, grid or MU_SAMPLES):
        a, b = o1_2_3_apexes(mu)
        report = canonical_dg([0j, 1 + 0j], [mu, 3.0], [a, b])
        row = o1_2_3_log_term(mu)
        row.update({'residue_free': report['residue_free'], 'max_residue': report['max_residue'],
                    'relative_error': float(abs(row['frobenius'] - row['closed_form']) / abs(row['closed_form']))})
        rows.append(row)
    holds = all(r['residue_free'] and abs(r['frobenius']) > tol and r['relative_error'] < 1e-6 for r in rows)
    return {'samples': rows, 'holds': bool(holds),
            'argument': 'the log-term coefficient at z = 1 is -(mu+2)/3, never zero for mu > -1'}


# --- O(2,-2,-2,-2) --------------------------------------------------------------

def admissible_triples(bound=None):
    """(m2, m3, m4) = mu# + 1 with m2, m3 <= m4, m2 + m3 != m4 and an odd sum."""
    bound = classification_config['m_bound'] if bound is None else bound
    out = []
    for m2, m3, m4 in itertools.product(range(1, bound + 1), repeat=3):
        if m2 <= m4 and m3 <= m4 and m2 + m3 != m4 and (m2 + m3 + m4) % 2 == 1:
            out.append((m2, m3, m4))
    return out


def phi(alpha2, alpha3, m2, m3, m4):
    alpha2, alpha3 = np.asarray(alpha2, dtype=float), np.asarray(alpha3, dtype=float)
    return (np.sqrt(np.maximum(m2 * m2 - 8 * alpha2 ** 2, 0.0))
            + np.sqrt(np.maximum(m3 * m3 - 8 * alpha3 ** 2, 0.0))
            + np.sqrt(np.maximum(m4 * m4 - 8 * (alpha2 + alpha3) ** 2, 0.0)))


def phi_gradient(alpha2, alpha3, m2, m3, m4):
    s = alpha2 + alpha3
    outer = -8 * s / np.sqrt(m4 * m4 - 8 * s * s)
    return (-8 * alpha2 / np.sqrt(m2 * m2 - 8 * alpha2 ** 2) + outer,
            -8 * alpha3 / np.sqrt(m3 * m3 - 8 * alpha3 ** 2) + outer)


def phi_boundary_values(m2, m3, m4):
    """Closed-form candidates for the minimum of phi on the closed domain."""
    if m2 + m3 <= m4:
        values = {'corner': float(np.sqrt(m4 * m4 - (m2 + m3) ** 2))}
    else:
        values = {
            'line_start': float(np.sqrt((m3 + m2 - m4) * (m2 + m4 - m3))),
            'line_end': float(np.sqrt((m3 + m2 - m4) * (m3 + m4 - m2))),
        }
    values['minimum'] = min(values.values())
    return values


def _domain_samples(m2, m3, m4, grid):
    a2 = np.linspace(0.0, m2 / SQRT8, grid)
    a3 = np.linspace(0.0, m3 / SQRT8, grid)
    A2, A3 = np.meshgrid(a2, a3, indexing='ij')
    limit = m4 / SQRT8
    inside = A2 + A3 <= limit * (1 + 1e-12)
    line_a2 = a2[(limit - a2 >= 0) & (limit - a2 <= m3 / SQRT8)]
    boundary = (np.concatenate([A2[inside], line_a2]), np.concatenate([A3[inside], limit - line_a2]))
    interior = (A2 > 0) & (A3 > 0) & (A2 < a2[-1]) & (A3 < a3[-1]) & (A2 + A3 < limit * (1 - 1e-9))
    return boundary, (A2[interior], A3[interior])


def phi_certificate(m2, m3, m4, grid=None, margin=None):
    grid = classification_config['phi_grid'] if grid is None else grid
    margin = classification_config['phi_margin'] if margin is None else margin
    if grid < MIN_GRID:
        raise GridTooCoarse(f"A grid of {grid} points per axis cannot resolve the domain, use at least {MIN_GRID}")
    (b2, b3), (i2, i3) = _domain_samples(m2, m3, m4, grid)
    values = phi(b2, b3, m2, m3, m4)
    interior = phi(i2, i3, m2, m3, m4)
    if interior.size and float(interior.min()) <= 1.0:
        raise GridTooCoarse(f"Interior sample of phi for {(m2, m3, m4)} reaches {interior.min():.12g} <= 1")
    d2, d3 = phi_gradient(i2, i3, m2, m3, m4)
    closed = phi_boundary_values(m2, m3, m4)
    grid_min = float(values.min())
    return {
        'triple': [m2, m3, m4],
        'grid': grid,
        'grid_minimum': grid_min,
        'interior_minimum': float(interior.min()) if interior.size else None,
        'boundary_values': closed,
        'decreasing': bool(np.all(d2 < 0) and np.all(d3 < 0)),
        'holds': bool(grid_min >= 1 - margin),
        'margin': grid_min - 1.0,
    }


def _verify_o2_2_2_2(grid, jobs, bound=None):
    triples = admissible_triples(bound)
    if jobs > 1:
        rows = Parallel(n_jobs=jobs)(delayed(phi_certificate)(*t, grid=grid) for t in triples)
    else:
        rows = [phi_certificate(*t, grid=grid) for t in triples]
    worst = min(rows, key=lambda r: r['margin'])
    return {'triples': rows, 'count': len(rows), 'worst': worst,
            'holds': all(r['holds'] and r['decreasing'] for r in rows),
            'argument': 'phi > 1 on the domain, so the conical orders cannot sum to -2'}


# --- O(-1,-3) and O(-2,-3) --------------------------------------------------------

def two_end_certificate(orders, rho=4):
    """Integrality patterns of a two-ended genus 0 type and whether each one is ruled out.

    Integral conical orders make g single-valued, so the surface is H3-reducible and its dual is
    well defined with TA(f##) = TA(f); the type must then appear as H3-reducible among the
    surfaces with dual total curvature at most 8pi. Two non-integral orders give an H1-reducible
    surface, which is only ruled out when d1 + d2 = -5.
    """
    orders = tuple(sorted(orders, reverse=True))
    label = SurfaceType(0, orders).label()
    patterns, failed = assess_type(0, orders, rho)
    listed = DUAL_EIGHT_PI_ROWS.get(label, ())
    integral = []
    if tuple(False for _ in orders) in patterns:
        bounds = general_class_bounds(0, len(orders), rho)
        for mus in integral_conical_orders(0, orders, rho, bounds):
            excess = sum(mu - d for mu, d in zip(mus, orders))
            kind = reducibility_classify([mu + 1 for mu in mus])
            integral.append({'mus': list(mus), 'ta_over_pi': 2 * (excess - 2), 'reducibility': kind,
                             'dual_listed': kind in listed})
    non_integral = []
    for pattern in patterns:
        if not any(pattern):
            continue
        kind = 'H1' if sum(pattern) == 2 else 'irreducible-possible'
        non_integral.append({'pattern': ['non-integral' if x else 'integral' for x in pattern],
                             'reducibility': kind, 'order_sum': sum(orders),
                             'ruled_out': kind == 'H1' and sum(orders) == -5})
    if failed:
        holds = True
    else:
        holds = (all(not row['dual_listed'] for row in integral)
                 and all(row['ruled_out'] for row in non_integral))
    return {'type': label, 'rules_failed': failed, 'dual_reducibility_listed': list(listed),
            'integral': integral, 'non_integral': non_integral, 'holds': bool(holds)}


def _verify_two_ends(orders):
    def verify(grid, jobs):
        report = two_end_certificate(orders)
        report['cited'] = bool(report['non_integral'])
        report['argument'] = ('integral conical orders make the surface H3-reducible, and no H3-reducible surface of '
                              'this type has dual total curvature at most 8pi; two non-integral orders are excluded '
                              'as in the d1 + d2 = -5 case')
        return report
    return verify


PROPOSITIONS = {
    'O(-1,-3)': _verify_two_ends((-1, -3)),
    'O(-2,-3)': _verify_two_ends((-2, -3)),
    'O(0,-2,-3)': _verify_o0_2_3,
    'O(1,-2,-3)': _verify_o1_2_3,
    'O(2,-2,-2,-2)': _verify_o2_2_2_2,
}


def verify_nonexistence(prop_id, grid=None, jobs=1):
    key = prop_id.replace(' ', '')
    if key not in PROPOSITIONS:
        raise ValueError(f"Unsupported type {prop_id}. Choose one of {list(PROPOSITIONS)}.")
    logger.info("verifying nonexistence for %s (grid %s, %d job(s))", key, grid, jobs)
    report = PROPOSITIONS[key](grid, jobs)
    report['type'] = key
    if not report['holds']:
        logger.warning("nonexistence check for %s did not hold", key)
    return report
