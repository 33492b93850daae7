import logging

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import roots_legendre

from bryant_lab.errors import BadParameter, Inadmissible, LogarithmicTerm
from bryant_lab.expressions.branch_expr import BranchExpr
from bryant_lab.expressions.calculus import anchored
from bryant_lab.expressions.rational_map import INFINITY, RationalMap
from bryant_lab.holonomy.lift import integrate_lift
from bryant_lab.holonomy.surface_spec import DualData, SecondaryData, SurfaceSpec

logger = logging.getLogger(__name__)

BASEPOINT_CANDIDATES = (0.5 + 0.5j, 0.5 - 0.5j, -0.5 + 0.5j, 0.3 + 0.7j, 0.7 + 0.2j, -0.3 - 0.6j, 0.2 + 0.3j)
INF = 'inf'


def _basepoint(points, candidates=BASEPOINT_CANDIDATES, scale=1.0):
    """First candidate (scaled) keeping a fair distance from every singular point."""
    points = [complex(p) for p in points]
    best, best_gap = None, -1.0
    for c in candidates:
        c = complex(c) * scale
        gap = min([abs(c - p) for p in points] + [np.inf])
        if gap > best_gap:
            best, best_gap = c, gap
        if gap >= 0.2 * scale:
            return c
    return best


def _metadata(family, type_label, ta, ta_dual, anchors, period_status='closed', reducibility='unknown', **extra):
    meta = {
        'family': family,
        'type': type_label,
        'expected_ta_over_pi': ta,
        'expected_ta_dual_over_pi': ta_dual,
        'period_status': period_status,
        'reducibility': reducibility,
        'anchors': list(anchors),
        'discrepancies': [],
    }
    meta.update(extra)
    return meta


def _require(condition, message):
    if not condition:
        raise BadParameter(message)


def _monomial(coeff, *factors):
    return BranchExpr.monomial(coeff, tuple(f for f in factors if f[1] != 0))


# --- horosphere and Enneper cousins -----------------------------------------------

def horosphere_lift(a):
    def lift(z):
        return np.array([[1.0, 0.0], [a * z, 1.0]], dtype=complex)
    return lift


def make_horosphere(a=1.0):
    _require(a != 0, "a must be nonzero")
    data = SecondaryData(gprime=BranchExpr(()), omega=BranchExpr.constant(a), g_base=0j, g_expr=BranchExpr(()))
    meta = _metadata('horosphere', 'O(0)', 0.0, 0.0, ['horosphere: g = 0, omega = a dz'],
                     reducibility='H3', totally_umbilic=True)
    return SurfaceSpec(punctures=(INFINITY,), data=data, basepoint=0j, name='horosphere',
                       params={'a': a}, metadata=meta)


def enneper_lift(a):
    def lift(z):
        c, s = np.cosh(a * z), np.sinh(a * z)
        return np.array([[c, s / a - z * c], [a * s, c - a * z * s]], dtype=complex)
    return lift


def enneper_dual_lift(a):
    forward = enneper_lift(a)

    def lift(z):
        F = forward(z)
        return np.array([[F[1, 1], -F[0, 1]], [-F[1, 0], F[0, 0]]], dtype=complex)
    return lift


ENNEPER_CONVENTIONS = ('closed_form', 'stated')


def make_enneper(a=1.0, convention='closed_form'):
    """Enneper cousin, g = z. The closed-form lift solves the lift ODE for omega = a^2 dz;
    convention='stated' uses omega = a dz instead."""
    _require(a != 0, "a must be nonzero")
    if convention not in ENNEPER_CONVENTIONS:
        raise ValueError(f"Unsupported convention. Choose one of {ENNEPER_CONVENTIONS}.")
    scale = a * a if convention == 'closed_form' else a
    data = SecondaryData(gprime=BranchExpr.constant(1.0), omega=BranchExpr.constant(scale), g_base=0j,
                         g_expr=BranchExpr.monomial(1.0, [(0j, 1)]))
    meta = _metadata('enneper', 'O(-4)', 4.0, INF, ['Enneper cousin: g = z, omega = a dz, F(0) = id'],
                     reducibility='H3', omega_convention=convention, G='tanh(a z)/a')
    meta['discrepancies'].append(
        "the displayed lift satisfies dF = F A only for omega = a^2 dz; the data is printed with omega = a dz")
    return SurfaceSpec(punctures=(INFINITY,), data=data, basepoint=0j, name='enneper',
                       params={'a': a, 'convention': convention}, metadata=meta)


def make_enneper_dual(a=1.0):
    """The lift F^-1 of the Enneper cousin, given by its own (G, Q) = (z, -a^2 dz^2)."""
    _require(a != 0, "a must be nonzero")
    data = DualData(G=RationalMap.polynomial([0.0, 1.0]), Q=BranchExpr.constant(-a * a))
    meta = _metadata('enneper_dual', 'O(-4)', INF, 4.0, ['dual of the Enneper cousin: F^-1'],
                     reducibility='H3', omega_sharp='-a^2 cosh^2(a z) dz', g_sharp='tanh(a z)/a')
    meta['discrepancies'].append(
        "the secondary data of the dual reads omega# = -a^2 cosh^2(az) dz from -dF F^-1; it is printed as a^2 cos^2(az) dz")
    return SurfaceSpec(punctures=(INFINITY,), data=data, basepoint=0j, name='enneper_dual',
                       params={'a': a}, metadata=meta)


def enneper_omega_convention(a=1.0, samples=8, radius=0.9):
    """Integrate the Enneper data under both omega conventions and compare with the closed-form lift."""
    closed = enneper_lift(a)
    targets = radius * np.exp(2j * np.pi * (np.arange(samples) + 0.25) / samples)
    errors = {}
    for convention in ENNEPER_CONVENTIONS:
        spec = make_enneper(a, convention)
        errors[convention] = max(float(np.max(np.abs(integrate_lift(spec, [0j, z]) - closed(z))))
                                 for z in targets)
    chosen = min(errors, key=errors.get)
    logger.info("Enneper lift errors by omega convention: %s", errors)
    return {'a': a, 'errors': errors, 'reproduces_closed_form': chosen, 'max_error': errors[chosen]}


# --- catenoid cousins ---------------------------------------------------------------

def catenoid_lift(l, delta=1, b=0.0):
    k = np.sqrt(complex((delta ** 2 - l ** 2) / delta))
    B = np.array([[1.0, -b], [0.0, 1.0]], dtype=complex)

    def lift(z):
        z = complex(z)
        F0 = k * np.array([
            [z ** ((delta - l) / 2) / (l - delta), (delta - l) / (4 * l) * z ** ((l + delta) / 2)],
            [z ** (-(l + delta) / 2) / (l + delta), -(l + delta) / (4 * l) * z ** ((l - delta) / 2)],
        ], dtype=complex)
        return F0 @ B
    return lift


def make_catenoid_cousin(l=0.8, delta=1, b=0.0):
    """delta-fold covers of catenoid cousins (b = 0) and warped catenoid cousins (b > 0, l integer)."""
    _require(l > 0, "l must be positive")
    _require(float(delta).is_integer() and delta >= 1, "delta must be a positive integer")
    _require(l != delta, "l must differ from delta")
    _require(b >= 0, "b must be nonnegative")
    _require(b == 0 or float(l).is_integer(), "b > 0 needs an integer l")
    delta = int(delta)
    c = (delta ** 2 - l ** 2) / (4 * l)
    data = SecondaryData(
        gprime=BranchExpr.monomial(c * l, [(0j, l - 1)]),
        omega=BranchExpr.monomial(1.0, [(0j, -l - 1)]),
        g_base=complex(c + b),
        g_expr=BranchExpr.monomial(c, [(0j, l)]) + b,
    )
    name = 'warped_catenoid_cousin' if b > 0 else 'catenoid_cousin'
    meta = _metadata(name, 'O(-2,-2)', 4.0 * l, 4.0 * delta,
                     ['catenoid cousins: g = (delta^2 - l^2)/(4l) z^l + b, omega = z^(-l-1) dz', 'F = F0 B'],
                     reducibility='H3' if float(l).is_integer() else 'H1',
                     G=RationalMap.power(delta).to_json(), hopf_coefficient=(delta ** 2 - l ** 2) / 4)
    return SurfaceSpec(punctures=(0j, INFINITY), data=data, basepoint=1.0 + 0j,
                       initial_frame=catenoid_lift(l, delta, b)(1.0), name=name,
                       params={'l': l, 'delta': delta, 'b': b}, metadata=meta)


# --- trinoids and 4-noids -------------------------------------------------------------

def trinoid_conditions(mu1, mu2, mu3):
    """(angle condition value, which must be < 1; double-umbilic discriminant, which must be nonzero)."""
    B = np.pi * (np.asarray([mu1, mu2, mu3], dtype=float) + 1)
    cos = np.cos(B)
    angle = float(np.sum(cos ** 2) + 2 * np.prod(cos))
    c1, c2, c3 = (-m * (m + 2) / 2 for m in (mu1, mu2, mu3))
    nodouble = c1 ** 2 + c2 ** 2 + c3 ** 2 - 2 * (c1 * c2 + c2 * c3 + c3 * c1)
    return angle, float(nodouble)


def make_trinoid(mu1=-0.3, mu2=-0.3, mu3=-0.3):
    """Irreducible trinoid with ends 0, 1, infinity of conical orders mu1, mu2, mu3."""
    mus = (mu1, mu2, mu3)
    if min(mus) <= -1:
        raise Inadmissible(f"conical orders must exceed -1, got {mus}")
    angle, nodouble = trinoid_conditions(*mus)
    if angle >= 1:
        raise Inadmissible(f"angle condition fails: {angle:.6g} >= 1")
    if abs(nodouble) < 1e-12:
        raise Inadmissible("the two umbilic points coincide")
    c1, c2, c3 = (-m * (m + 2) / 2 for m in mus)
    q1, q2 = (complex(r) for r in np.roots([c3, c2 - c1 - c3, c1]))
    Q = _monomial(c3 / 2, (q1, 1), (q2, 1), (0j, -2), (1.0 + 0j, -2))
    s = q1 + q2
    G = RationalMap([(q1 - q2) ** 2, -2 * s, 4.0], [-2 * s, 4.0])
    signature = ''.join('+' if c > 0 else '-' for c in (c1, c2, c3))
    meta = _metadata('trinoid', 'O(-2,-2,-2)', 2.0 * (4 + sum(mus)), 8.0,
                     ['irreducible trinoids: Q, umbilics q1, q2 and G = z + (q1-q2)^2/(2(2z-q1-q2))'],
                     reducibility='irreducible', umbilics=[[q.real, q.imag] for q in (q1, q2)],
                     signature=f"({','.join(signature)})", c=[c1, c2, c3])
    base = _basepoint([0j, 1.0 + 0j, q1, q2, s / 2])
    return SurfaceSpec(punctures=(0j, 1.0 + 0j, INFINITY), data=DualData(G=G, Q=Q), basepoint=base,
                       name='trinoid', params={'mu1': mu1, 'mu2': mu2, 'mu3': mu3}, metadata=meta)


def make_fournoid(mu=-0.5, a=0.8, p=1.4):
    """4-noid candidate on the sphere minus {a, -a, 1/a, -1/a}; its period problem is solved in p."""
    _require(0 < a < 1, "a must lie in (0, 1)")
    _require(mu > -1, "mu must exceed -1")
    _require(np.isreal(p) and p not in (0, 1), "p must be real and differ from 0 and 1")
    guard = p * a ** 4 - (3 * p ** 2 - 1) * a ** 2 + p
    _require(abs(guard) > 1e-12, "p a^4 - (3p^2 - 1) a^2 + p vanishes")
    K = -mu * (mu + 2) * a ** 2 * (a ** 2 - a ** -2) ** 2 / guard
    disc = np.sqrt(complex((3 * p ** 2 - 1) ** 2 - 4 * p ** 2))
    squares = [((3 * p ** 2 - 1) + disc) / (2 * p), ((3 * p ** 2 - 1) - disc) / (2 * p)]
    umbilics = [s * r for r in (np.sqrt(complex(w)) for w in squares) for s in (1, -1)]
    ends = [a, -a, 1 / a, -1 / a]
    Q = _monomial(K * p, *[(u, 1) for u in umbilics], *[(complex(e), -2) for e in ends])
    G = RationalMap([0.0, -1.0, 0.0, p], [-p, 0.0, 1.0])
    meta = _metadata('fournoid', 'O(-2,-2,-2,-2)', 4.0 * (2 * mu + 3), 12.0,
                     ['4-noids with TA < 8 pi: G = (p z^3 - z)/(z^2 - p)'],
                     period_status='open', free_parameter='p', bracket=[1.0, 2.0])
    base = _basepoint(ends + umbilics + [0j], candidates=(0.35 + 0.35j, 0.3 + 0.5j, 0.5 + 0.3j, 0.2 + 0.6j))
    return SurfaceSpec(punctures=tuple(complex(e) for e in ends), data=DualData(G=G, Q=Q), basepoint=base,
                       name='fournoid', params={'mu': mu, 'a': a, 'p': p}, metadata=meta)


# --- reducible families ---------------------------------------------------------------

def _check_mu_interval(mu, low=-1.0, high=0.0):
    _require(low < mu < high, f"mu must lie in ({low:g}, {high:g})")


def make_o0_2_2(mu=-0.5, m=1, t=1.0):
    """O(0,-2,-2) with g = z^(mu+1)(mu z - (mu+2))/((mu+2)z - mu) and G the same with m."""
    _check_mu_interval(mu)
    _require(float(m).is_integer() and m >= 1, "m must be a positive integer")
    _require(t > 0, "t must be positive")
    m = int(m)
    theta = (m * (m + 2) - mu * (mu + 2)) / 4
    r = mu / (mu + 2)
    gprime = _monomial(t * mu * (mu + 1) / (mu + 2), (0j, mu), (1.0 + 0j, 2), (complex(r), -2))
    omega = _monomial(theta * (mu + 2) / (t * mu * (mu + 1)), (0j, -2 - mu), (1.0 + 0j, -2), (complex(r), 2))
    g_expr = _monomial(t * mu / (mu + 2), (0j, mu + 1), (complex((mu + 2) / mu), 1), (complex(r), -1))
    num = np.zeros(m + 3)
    num[m + 1], num[m + 2] = -(m + 2), m
    G = RationalMap(num, [-m, m + 2])
    meta = _metadata('o0_2_2', 'O(0,-2,-2)', 4.0 * (mu + 2), 4.0 * (m + 2),
                     ['one parameter family of type O(0,-2,-2)'], reducibility='H1',
                     G=G.to_json(), hopf_coefficient=theta)
    return SurfaceSpec(punctures=(1.0 + 0j, 0j, INFINITY),
                       data=SecondaryData(gprime, omega, g_expr(0.5 + 0.5j), g_expr),
                       basepoint=0.5 + 0.5j, name='o0_2_2', params={'mu': mu, 'm': m, 't': t}, metadata=meta)


def o_1_2_2_parameters(mu, m):
    a = -(m + mu + 2) / (m - mu - 2)
    p = (a * mu + a - a * a) / (a * mu + a - 1)
    theta = 4 * m ** 2 * (m * (m + 2) - mu * (mu + 2)) / ((m + mu) ** 2 * (2 - m + mu) ** 2)
    return a, p, theta


def _primitive(gprime, anchor, base, nodes=64):
    """Integral of g' from anchor to base along the segment, on the branch that is principal at base."""
    x, w = roots_legendre(nodes)
    z = anchor + (base - anchor) * (x + 1) / 2
    return complex(np.sum(w * anchored(gprime, base)(z)) * (base - anchor) / 2)


def _integrate_dG(dG, family):
    try:
        return RationalMap.from_derivative(dG)
    except LogarithmicTerm as exc:
        raise BadParameter(f"{family}: dG has a residue, so G is not rational ({exc})") from exc


def make_o_1_2_2(mu=-0.5, m=2, t=1.0):
    """H1-reducible O(-1,-2,-2) with ends 0, 1, p and one umbilic point at infinity."""
    _check_mu_interval(mu)
    _require(float(m).is_integer() and m >= 2, "m must be an integer >= 2")
    _require(t > 0, "t must be positive")
    m = int(m)
    a, p, theta = o_1_2_2_parameters(mu, m)
    gprime = _monomial(t, (0j, 1), (1.0 + 0j, mu), (complex(p), -mu - 2), (complex(a), -2))
    omega = _monomial(theta / t, (0j, -2), (1.0 + 0j, -2 - mu), (complex(p), mu), (complex(a), 2))
    b = p / a
    scale = -(mu + 1) * (1 - p) * (a + b) - (1 + p) * (b - a)
    g_expr = _monomial(t / scale, (1.0 + 0j, mu + 1), (complex(p), -mu - 1), (complex(b), 1), (complex(a), -1))
    dG = _monomial(1.0, (0j, 1), (complex(p), m - 2), (1.0 + 0j, -m - 2))
    G = _integrate_dG(dG, 'o_1_2_2')
    meta = _metadata('o_1_2_2', 'O(-1,-2,-2)', 4.0 * (mu + 2), 4.0 * (m + 1),
                     ['H1-reducible O(-1,-2,-2) with TA < 8 pi'], reducibility='H1',
                     G=G.to_json(), apexes=[a], a=a, p=p, hopf_coefficient=theta)
    base = _basepoint([0j, 1.0 + 0j, complex(p), complex(a), complex(b)])
    return SurfaceSpec(punctures=(0j, 1.0 + 0j, complex(p)), data=SecondaryData(gprime, omega, g_expr(base), g_expr),
                       basepoint=base, name='o_1_2_2', params={'mu': mu, 'm': m, 't': t}, metadata=meta)


def o_1_2_2_a_parameters(case, mu, m, root=1):
    if case == 1:
        p = (m * (m + 2) - mu * (mu + 2)) / ((m - 2) ** 2 - mu ** 2)
        theta = (mu - 3 * m + 2) ** 2 * (m * (m + 2) - mu * (mu + 2)) / ((m - 2) ** 2 - mu ** 2) ** 2
        return p, theta, None
    if case == 2:
        p = (mu + m + 2) / (mu + m)
        theta = (m - mu) * (mu + m + 2) / (m + mu) ** 2
        root_term = np.sqrt(9 * (m - mu) ** 2 + 16 * m * (mu + 1) + 16 * mu * (m + 1))
        a = (m - mu + (1 if root >= 0 else -1) * root_term) / (2 * (mu + m))
        return p, theta, a
    raise ValueError("Unsupported case. Choose 1 or 2.")


def make_o_1_2_2_a(case=1, mu=-0.5, m=3, root=1):
    """H1-reducible O(-1,-2,-2) with TA = 8 pi, given by (G, Q)."""
    _check_mu_interval(mu)
    _require(float(m).is_integer(), "m must be an integer")
    m = int(m)
    _require(m >= (3 if case == 1 else 1), f"case {case} needs m >= {3 if case == 1 else 1}")
    p, theta, a = o_1_2_2_a_parameters(case, mu, m, root)
    if case == 1:
        dG = _monomial(1.0, (0j, 2), (complex(p), m - 3), (1.0 + 0j, -m - 2))
        degree = m + 1
    else:
        dG = _monomial(1.0, (0j, 2), (complex(p), m - 1), (1.0 + 0j, -m - 2), (complex(a), -2))
        degree = m + 2
    G = _integrate_dG(dG, 'o_1_2_2_a')
    Q = _monomial(theta, (0j, -1), (1.0 + 0j, -2), (complex(p), -2))
    meta = _metadata('o_1_2_2_a', 'O(-1,-2,-2)', 8.0, 4.0 * degree,
                     [f'H1-reducible O(-1,-2,-2) with TA = 8 pi, parameter case {case}'], reducibility='H1',
                     p=p, hopf_coefficient=theta, apexes=[] if a is None else [a], mus=[2.0, mu, -mu - 1])
    avoid = [0j, 1.0 + 0j, complex(p)] + ([] if a is None else [complex(a)])
    return SurfaceSpec(punctures=(0j, 1.0 + 0j, complex(p)), data=DualData(G=G, Q=Q),
                       basepoint=_basepoint(avoid), name='o_1_2_2_a',
                       params={'case': case, 'mu': mu, 'm': m, 'root': root}, metadata=meta)


def make_o_2_4(mu=-0.5, t=1.0):
    """O(-2,-4): dg = t z^mu (z^2 - a^2)/(z^2 - 1)^2, Q = theta (z^2 - a^2)/z^2."""
    _check_mu_interval(mu)
    _require(t > 0, "t must be positive")
    a = np.sqrt(complex((mu + 1) / (mu - 1)))
    theta = mu * (mu + 2) * (mu - 1) / (4 * (mu + 1))
    gprime = _monomial(t, (0j, mu), (a, 1), (-a, 1), (1.0 + 0j, -2), (-1.0 + 0j, -2))
    omega = _monomial(theta / t, (0j, -2 - mu), (1.0 + 0j, 2), (-1.0 + 0j, 2))
    g_expr = _monomial(t / (mu - 1), (0j, mu + 1), (1.0 + 0j, -1), (-1.0 + 0j, -1))
    meta = _metadata('o_2_4', 'O(-2,-4)', 8.0, INF, ['example of type O(-2,-4)'], reducibility='H1',
                     stated_ta_over_pi=4.0 * (mu + 2), a_squared=(mu + 1) / (mu - 1), hopf_coefficient=theta,
                     apexes=[1.0, -1.0])
    meta['discrepancies'].append(
        "dg ~ z^(mu-2) at infinity gives conical order -mu there, so TA = 8 pi; "
        "the stated orders mu1 = mu2 = mu give 4 pi (mu + 2)")
    base = _basepoint([0j, a, -a, 1.0, -1.0])
    return SurfaceSpec(punctures=(0j, INFINITY), data=SecondaryData(gprime, omega, g_expr(base), g_expr),
                       basepoint=base,
                       name='o_2_4', params={'mu': mu, 't': t}, metadata=meta)


def make_o_2_5(mu=-0.5, t=1.0):
    """O(-2,-5): dg = t z^mu (z^3 - a^3)/(z^3 - 1)^2, Q = theta (z^3 - a^3)/z^2."""
    _require(mu > -1 and mu not in (0, 2), "mu must exceed -1 and avoid 0 and 2")
    _require(t > 0, "t must be positive")
    a3 = (mu + 1) / (mu - 2)
    theta = mu * (mu ** 2 - 4) / (4 * (mu + 1))
    cube = np.exp(2j * np.pi * np.arange(3) / 3)
    umbilics = [complex(r) for r in np.cbrt(a3) * cube]
    roots_of_unity = [complex(w) for w in cube]
    gprime = _monomial(t, (0j, mu), *[(u, 1) for u in umbilics], *[(w, -2) for w in roots_of_unity])
    omega = _monomial(theta / t, (0j, -2 - mu), *[(w, 2) for w in roots_of_unity])
    g_expr = _monomial(t / (mu - 2), (0j, mu + 1), *[(w, -1) for w in roots_of_unity])
    mu1, mu2 = abs(mu + 1) - 1, abs(2 - mu) - 1
    meta = _metadata('o_2_5', 'O(-2,-5)', 2.0 * (5 + mu1 + mu2), INF, ['example of type O(-2,-5)'],
                     period_status='open', reducibility='H1', free_parameter='t', bracket=[0.5, 2.0],
                     stated_ta_over_pi=2.0 * (5 + abs(mu + 1) - 1 + abs(mu) - 1), umbilics=[[u.real, u.imag] for u in umbilics],
                     hopf_coefficient=theta, apexes=[[w.real, w.imag] for w in roots_of_unity])
    meta['discrepancies'].append(
        "dg ~ z^(mu-3) at infinity gives conical order |2 - mu| - 1 there; the stated order is |mu| - 1")
    base = _basepoint([0j] + umbilics + roots_of_unity, candidates=(0.5 + 0.3j, 0.4 - 0.2j, 0.3 + 0.6j, -0.6 + 0.1j))
    return SurfaceSpec(punctures=(0j, INFINITY), data=SecondaryData(gprime, omega, g_expr(base), g_expr),
                       basepoint=base,
                       name='o_2_5', params={'mu': mu, 't': t}, metadata=meta)


def o_2_2_2_0_relations(mu, q2):
    """(a^2 from the explicit relation, residual of the apex residue relation) for q^2 = q2."""
    a2 = -(1 - mu - q2) / (3 + mu - 3 * q2)
    residual = (2 * mu + 3) * a2 ** 2 - ((2 * mu + 1) * q2 + 3) * a2 + q2
    return a2, residual


def solve_o_2_2_2_0(mu, tol=1e-9):
    """Values of q^2 for which both relations fixing a^2 hold; roots of a cubic in q^2."""
    D = np.array([3 + mu, -3.0])
    N = np.array([mu - 1, 1.0])
    cubic = P.polysub(P.polyadd((2 * mu + 3) * P.polymul(N, N), P.polymul([0.0, 1.0], P.polymul(D, D))),
                      P.polymul(P.polymul([3.0, 2 * mu + 1], N), D))
    out = []
    for q2 in P.polyroots(cubic):
        if abs(q2.imag) > tol * max(1.0, abs(q2)):
            continue
        q2 = float(q2.real)
        if abs(3 + mu - 3 * q2) < tol:
            continue
        a2, _ = o_2_2_2_0_relations(mu, q2)
        if min(abs(q2), abs(q2 - 1), abs(a2), abs(a2 - 1), abs(a2 - q2)) < 1e-8:
            continue
        out.append(q2)
    logger.debug("q^2 candidates for mu=%s: %s", mu, out)
    return sorted(out)


def make_o_2_2_2_0(mu=-0.75, q=None, t=1.0, root=0, tol=1e-8):
    """O(-2,-2,-2,0) with ends 1, -1, infinity, 0 and umbilics at +-q."""
    _check_mu_interval(mu, -1.0, -0.5)
    _require(t > 0, "t must be positive")
    if q is None:
        candidates = solve_o_2_2_2_0(mu)
        if not candidates:
            raise BadParameter(f"no q satisfies both relations for mu = {mu}")
        q2 = candidates[min(root, len(candidates) - 1)]
    else:
        q2 = complex(q) ** 2
        _, residual = o_2_2_2_0_relations(mu, q2)
        if abs(residual) > tol:
            raise BadParameter(
                f"relations conflict for mu={mu}, q={q}: residue relation residual {abs(residual):.3e}; "
                f"consistent q^2 values are {solve_o_2_2_2_0(mu)}")
    a2, residual = o_2_2_2_0_relations(mu, q2)
    q_val, a = np.sqrt(complex(q2)), np.sqrt(complex(a2))
    K = -mu * (mu + 2) / (q2 - 1)
    one, minus = 1.0 + 0j, -1.0 + 0j
    gprime = _monomial(t, (one, mu), (minus, mu), (q_val, 1), (-q_val, 1), (0j, 2), (a, -2), (-a, -2))
    omega = _monomial(K / t, (one, -2 - mu), (minus, -2 - mu), (0j, -2), (a, 2), (-a, 2))
    meta = _metadata('o_2_2_2_0', 'O(-2,-2,-2,0)', 8.0, None, ['example of type O(-2,-2,-2,0)'],
                     reducibility='H1', q_squared=float(np.real(q2)), a_squared=float(np.real(a2)),
                     relation_residual=float(abs(residual)), apexes=[[a.real, a.imag], [-a.real, -a.imag]])
    meta['discrepancies'].append(
        "the two relations fixing a^2 hold together only on a cubic's roots in q^2")
    meta['discrepancies'].append(
        "with the displayed sign of Q the end data at z = 1 needs (mu# + 1)^2 = 2 mu^2 + 4 mu + 1 < 0")
    base = _basepoint([one, minus, 0j, q_val, -q_val, a, -a])
    return SurfaceSpec(punctures=(one, minus, INFINITY, 0j), data=SecondaryData(gprime, omega, _primitive(gprime, 0j, base)),
                       basepoint=base, name='o_2_2_2_0', params={'mu': mu, 'q': None if q is None else q, 't': t},
                       metadata=meta)
