import logging

import numpy as np
from scipy.special import roots_legendre

from bryant_lab.config.settings import contour_config
from bryant_lab.errors import NonIntegerExponent, RadiusConflict, ZeroDerivative
from bryant_lab.expressions.branch_expr import BranchExpr, BranchState, is_integer_exponent, same_point

logger = logging.getLogger(__name__)


def is_infinity(p):
    return p is None or (isinstance(p, (complex, float)) and not np.isfinite(abs(p)))


def contour_radius(p, others, config=contour_config):
    others = [q for q in others if not same_point(p, q)]
    if not others:
        return config['radius_cap']
    nearest = min(abs(p - q) for q in others)
    radius = min(config['radius_cap'], config['radius_fraction'] * nearest)
    if radius <= 1e-10:
        raise RadiusConflict(f"No contour around {p} avoids the singular points {others}")
    return radius


def _trapezoid_coefficients(func, p, orders, radius, nodes):
    theta = 2 * np.pi * np.arange(nodes) / nodes
    unit = np.exp(1j * theta)
    values = np.asarray(func(p + radius * unit), dtype=complex)
    orders = np.asarray(orders)
    kernel = unit[None, :] ** (-orders[:, None])
    return (kernel @ values) / nodes / radius ** orders


def _converged_coefficients(func, p, orders, radius, config):
    nodes = config['nodes']
    estimate = _trapezoid_coefficients(func, p, orders, radius, nodes)
    for _ in range(config['max_doublings']):
        nodes *= 2
        refined = _trapezoid_coefficients(func, p, orders, radius, nodes)
        change = np.max(np.abs(refined - estimate))
        scale = np.max(np.abs(refined))
        estimate = refined
        if change <= config['abs_tol'] or change <= config['rel_tol'] * scale:
            return estimate, nodes
    logger.info("contour around %s did not settle after %d nodes", p, nodes)
    return estimate, nodes


def contour_coefficients(func, p, orders, radius=None, singular_points=(), config=contour_config):
    """Laurent coefficients of func at p for the given orders, with a two-radius error estimate.

    Returns (values, error).
    """
    if radius is None:
        radius = contour_radius(p, singular_points, config)
    values, nodes = _converged_coefficients(func, p, orders, radius, config)
    check, _ = _converged_coefficients(func, p, orders, radius / 2, config)
    error = float(np.max(np.abs(values - check))) if len(values) else 0.0
    logger.debug("contour at %s: radius %.3g, %d nodes, error %.2e", p, radius, nodes, error)
    return values, error


def anchored(expr, p):
    """Callable evaluating expr near p with arguments of the other points continued from p."""
    others = [q for q in expr.points() if not same_point(p, q)]

    def func(z):
        z = np.asarray(z, dtype=complex)
        args = {q: np.angle(p - q) + np.angle((z - q) / (p - q)) for q in others}
        return expr.evaluate(z, args)

    return func


def _require_integer_exponent(expr, p):
    for e in expr.exponents_at(p):
        if not is_integer_exponent(e):
            raise NonIntegerExponent(f"Exponent {e} at {p} is not an integer")


def laurent_coefficients(expr, p, orders, weight=1):
    """Laurent coefficients at p (finite or infinity); at infinity the expression is read as a weight-k differential."""
    if is_infinity(p):
        return laurent_coefficients(expr.to_infinity_chart(weight), 0j, orders)
    _require_integer_exponent(expr, p)
    return contour_coefficients(anchored(expr, p), p, list(orders), singular_points=expr.points())


def residue(expr, p):
    values, error = laurent_coefficients(expr, p, [-1], weight=1)
    return complex(values[0]), error


def residue_at_infinity(expr):
    return residue(expr, complex(np.inf))


def taylor_coeffs(expr, p, n):
    values, error = laurent_coefficients(expr, p, range(n), weight=0)
    return [complex(v) for v in values], error


def strip_leading(expr, p):
    """Split off the smallest exponent class at p: returns (exponent, expr / (z-p)**exponent)."""
    lowest = min(expr.exponents_at(p))
    return lowest, expr / BranchExpr.monomial(1.0, [(p, lowest)])


def local_exponent(expr, p, weight=0, max_order=24):
    """Order of vanishing of expr at p, for a weight-k differential coefficient at infinity."""
    if expr.is_zero():
        return np.inf
    if is_infinity(p):
        return local_exponent(expr.to_infinity_chart(weight), 0j, max_order=max_order)
    lowest, rest = strip_leading(expr, p)
    leading = 0j
    scale = 0.0
    for term in rest.terms:
        if is_integer_exponent(term.exponent_at(p)) and round(term.exponent_at(p)) == 0:
            others = [(q, e) for q, e in term.factors if not same_point(p, q)]
            value = term.coeff * np.prod([np.exp(e * np.log(p - q)) for q, e in others])
            leading += value
            scale += abs(value)
    if abs(leading) > 1e-10 * max(scale, 1e-300):
        return lowest
    coeffs, error = taylor_coeffs(rest, p, max_order)
    size = max(abs(c) for c in coeffs)
    for k, c in enumerate(coeffs):
        if abs(c) > max(1e-9 * size, 10 * error):
            return lowest + k
    return np.inf


def schwarzian_from_derivative(gprime):
    """Coefficient of dz**2 in S(g), built symbolically from g'."""
    if gprime.is_zero():
        raise ZeroDerivative("g' vanishes identically")
    single = gprime.factored()
    if single.is_zero():
        raise ZeroDerivative("g' vanishes identically")
    log_derivative = BranchExpr(())
    for p, e in single.terms[0].factors:
        log_derivative = log_derivative + BranchExpr.monomial(e, [(p, -1)])
    return log_derivative.differentiate() - log_derivative * log_derivative * 0.5


def schwarzian_values(g1, g2, g3):
    return g3 / g1 - 1.5 * (g2 / g1) ** 2


def continue_primitive(gprime, path, g0=0j, state=None, nodes=32):
    """Values of g with g(path[0]) = g0 at the vertices of a polyline, integrating g' on its tracked branch."""
    path = [complex(z) for z in path]
    if state is None:
        state = BranchState.start(path[0], gprime.singular_points())
    x, w = roots_legendre(nodes)
    g = complex(g0)
    values, states = [g], [state]
    for b in path[1:]:
        a = state.position
        pts = a + (b - a) * (x + 1) / 2
        vals = np.array([gprime.evaluate_tracked(p, state.advance(p)) for p in pts])
        g += complex(np.sum(w * vals) * (b - a) / 2)
        state = state.advance(b)
        values.append(g)
        states.append(state)
    return np.array(values), states


def moebius_invariance_check(gprime, a, samples, g0=0j, base=None, radius=None, nodes=64, rtol=1e-6):
    """True iff S(a*g) agrees with S(g) at every sample.

    g is continued from base (value g0) through the samples in order, a is applied to its values and
    S(a*g) is read off the Cauchy coefficients of a*g on a small circle around each sample.
    """
    a = np.asarray(a, dtype=complex)
    samples = [complex(z) for z in np.atleast_1d(np.asarray(samples, dtype=complex))]
    base = samples[0] if base is None else complex(base)
    nearby = gprime.points()
    s_expr = schwarzian_from_derivative(gprime)
    values, states = continue_primitive(gprime, [base] + samples, g0)
    theta = 2 * np.pi * np.arange(nodes) / nodes
    unit = np.exp(1j * theta)
    for z, g_z, state in zip(samples, values[1:], states[1:]):
        r = radius if radius is not None else 0.25 * min([abs(z - p) for p in nearby] + [1.0])
        ring = np.array([continue_primitive(gprime, [z, z + r * u], g_z, state)[0][-1] for u in unit])
        h = (a[0, 0] * ring + a[0, 1]) / (a[1, 0] * ring + a[1, 1])
        c1, c2, c3 = (np.mean(h * unit ** -n) / r ** n for n in (1, 2, 3))
        s_h = schwarzian_values(c1, 2 * c2, 6 * c3)
        s_g = s_expr.evaluate_tracked(z, state)
        if not np.isfinite(s_h) or abs(s_h - s_g) > rtol * max(abs(s_g), 1.0):
            logger.debug("Schwarzian mismatch at %s: %s vs %s", z, s_g, s_h)
            return False
    return True
