import logging

import numpy as np

logger = logging.getLogger(__name__)

INTEGER_TOL = 1e-9


def is_integral(x, tol=INTEGER_TOL):
    x = float(x)
    return bool(np.isfinite(x) and abs(x - round(x)) <= tol)


def _violation(fact, index, message):
    return {'fact': fact, 'index': index, 'message': message}


def facts_check(divisor):
    """Every relation between end orders, conical orders and umbilic orders that the divisor breaks."""
    if divisor.totally_umbilic:
        return []
    violations = []
    genus = divisor.genus
    if divisor.total_order() != 4 * genus - 4:
        violations.append(_violation('a', None, f"sum of orders {divisor.total_order()} != {4 * genus - 4}"))
    for j, end in enumerate(divisor.ends):
        mu, mu_sharp, d = float(end.mu), float(end.mu_sharp), end.d
        if np.isnan(mu) or not mu > -1:
            violations.append(_violation('g', j, f"mu = {mu} is not > -1"))
        if not np.isnan(mu):
            if not mu - d > 1:
                violations.append(_violation('c', j, f"mu - d = {mu - d} is not > 1"))
            elif is_integral(mu) and mu - d < 2 - INTEGER_TOL:
                violations.append(_violation('c', j, f"integral mu with mu - d = {mu - d} < 2"))
        if d >= -2 and not (is_integral(mu_sharp) and mu_sharp >= -INTEGER_TOL):
            violations.append(_violation('f', j, f"mu# = {mu_sharp} is not a non-negative integer at a regular end"))
        if d >= -1 and not np.isclose(mu, mu_sharp, atol=1e-8):
            violations.append(_violation('d', j, f"mu = {mu} differs from mu# = {mu_sharp} with d = {d} >= -1"))
    for k, xi in enumerate(divisor.umbilics):
        if not (is_integral(xi) and xi >= 1):
            violations.append(_violation('h', k, f"umbilic order {xi} is not a positive integer"))
    if genus >= 1 and all(end.is_regular() for end in divisor.ends):
        branch_points = sum(1 for end in divisor.ends if is_integral(end.mu_sharp) and end.mu_sharp > 0)
        branch_points += len(divisor.umbilics)
        if branch_points < 3:
            violations.append(_violation('e', None, f"G has {branch_points} branch point(s), genus {genus} needs 3"))
    if divisor.n == 1 and divisor.ends[0].d == -2:
        violations.append(_violation('single_end', 0, "a surface with one end cannot have d = -2 (flux rule)"))
    if violations:
        logger.debug("facts violated: %s", [v['fact'] for v in violations])
    return violations
