import logging

import numpy as np

from bryant_lab.classification.surface_type import DivisorData, EndData
from bryant_lab.errors import DegenerateDifferential, InvalidDivisor
from bryant_lab.expressions.branch_expr import same_point
from bryant_lab.expressions.calculus import is_infinity, laurent_coefficients, local_exponent

logger = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-13
INTEGER_TOL = 1e-6


def _ratio(num_a, den_a, num_b, den_b, scale, tol, name):
    """num/den from whichever of two equivalent pairs has the larger denominator."""
    use_b = np.abs(den_b) > np.abs(den_a)
    num = np.where(use_b, num_b, num_a)
    den = np.where(use_b, den_b, den_a)
    bad = (np.abs(den) <= tol * scale) & (np.abs(num) <= tol * scale)
    if np.any(bad):
        raise DegenerateDifferential(f"{name} is 0/0 at {int(np.sum(bad))} sample(s)")
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.where(np.abs(den) > 0, num / np.where(den == 0, 1, den), complex(np.inf))


def extract_gauss_maps(frames, tol=DEGENERACY_TOL):
    """Secondary and hyperbolic Gauss maps at the midpoints of consecutive frame samples.

    g = -dF12/dF11 (= -dF22/dF21) and G = dF11/dF21 (= dF12/dF22).
    """
    frames = np.asarray(frames, dtype=complex)
    if len(frames) < 2:
        return np.zeros(0, dtype=complex), np.zeros(0, dtype=complex)
    dF = np.diff(frames, axis=0)
    scale = max(float(np.max(np.abs(dF))), 1e-300)
    g = _ratio(-dF[:, 0, 1], dF[:, 0, 0], -dF[:, 1, 1], dF[:, 1, 0], scale, tol, 'g')
    G = _ratio(dF[:, 0, 0], dF[:, 1, 0], dF[:, 0, 1], dF[:, 1, 1], scale, tol, 'G')
    return g, G


def midpoints(points):
    points = np.asarray(points, dtype=complex)
    return (points[1:] + points[:-1]) / 2


def _as_int(x, what):
    if np.isinf(x):
        return x
    if abs(x - round(x)) > INTEGER_TOL:
        raise InvalidDivisor(f"{what} = {x} is not an integer")
    return int(round(x))


def second_order_coefficient(Q, p):
    """q_{-2}, the coefficient of (z-p)^-2 in Q (in the w = 1/z chart at infinity)."""
    values, _ = laurent_coefficients(Q, p, [-2], weight=2)
    return complex(values[0])


def _conical_order_from_derivative(gprime, p):
    e = local_exponent(gprime, p, weight=1)
    return abs(e + 1) - 1


def _sharp_from_square(square, p):
    """mu# from (mu# + 1)^2; left non-integral (or nan) so the facts check can flag it."""
    if square < -INTEGER_TOL:
        logger.warning("(mu# + 1)^2 = %.6g at %s is negative", square, p)
        return float('nan')
    value = np.sqrt(max(square, 0.0)) - 1
    if abs(value - round(value)) <= INTEGER_TOL:
        return int(round(value))
    logger.warning("mu# = %.6g at %s is not an integer", value, p)
    return float(value)


def _end_data(spec, p):
    Q = spec.hopf()
    d = _as_int(local_exponent(Q, p, weight=2), f"ord Q at {p}")
    data = spec.data
    if spec.mode == 'secondary':
        mu = _conical_order_from_derivative(data.gprime, p)
        if d <= -3:
            mu_sharp = np.inf
        elif d >= -1:
            mu_sharp = mu
        else:
            mu_sharp = _sharp_from_square((mu + 1) ** 2 + 4 * second_order_coefficient(Q, p).real, p)
        return EndData(d, float(mu), mu_sharp, p)
    mu_sharp = data.G.branching_order(p)
    if d <= -3:
        mu = np.inf
    elif d >= -1:
        mu = float(mu_sharp)
    else:
        square = (mu_sharp + 1) ** 2 - 4 * second_order_coefficient(Q, p).real
        if square <= 0:
            raise InvalidDivisor(f"(mu + 1)^2 = {square} at {p} is not positive")
        mu = float(np.sqrt(square) - 1)
    return EndData(d, mu, mu_sharp, p)


def _umbilics(spec):
    Q = spec.hopf().factored()
    ends = spec.punctures
    found = []
    for p, e in Q.terms[0].factors:
        if e <= 0 or any(not is_infinity(q) and same_point(p, q, 1e-9) for q in ends):
            continue
        found.append((p, _as_int(e, f"ord Q at {p}")))
    if not spec.has_infinite_end():
        order = local_exponent(spec.hopf(), complex(np.inf), weight=2)
        if order > 0:
            found.append((complex(np.inf), _as_int(order, "ord Q at infinity")))
    return found


def divisor_from_spec(spec):
    """End orders, conical orders and umbilic orders read off the data of a spec."""
    if spec.hopf().is_zero():
        logger.info("Q vanishes identically; %s is totally umbilic", spec.name or 'the surface')
        ends = tuple(EndData(0, 0.0, 0, p) for p in spec.punctures)
        return DivisorData(spec.genus, ends, totally_umbilic=True)
    ends = tuple(_end_data(spec, p) for p in spec.punctures)
    umbilics = _umbilics(spec)
    divisor = DivisorData(spec.genus, ends, tuple(xi for _, xi in umbilics), tuple(p for p, _ in umbilics))
    logger.debug("divisor of %s: %s", spec.name, divisor)
    return divisor
