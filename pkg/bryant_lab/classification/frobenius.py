import logging
from dataclasses import dataclass

import numpy as np

from bryant_lab.classification.facts import is_integral
from bryant_lab.config.settings import classification_config
from bryant_lab.errors import BadParameter, IrregularSingularPoint
from bryant_lab.expressions.calculus import anchored, contour_coefficients, is_infinity

logger = logging.getLogger(__name__)

POLE_ORDERS = 3
POLE_TOL = 1e-8
ROOT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class FrobeniusProblem:
    """X'' - (log omega_hat)' X' - Q_hat X = 0 around `point`, with omega = omega_hat dz and Q = Q_hat dz^2.

    Written as X'' + p X' + q X = 0, so p = -(log omega_hat)' and q = -Q_hat.
    """
    omega_hat: object
    q_hat: object
    point: complex
    terms: int = classification_config['frobenius_terms']

    @classmethod
    def from_spec(cls, spec, point, terms=None):
        """The equation of the surface a spec describes: (omega, Q) in secondary mode, (-Q/dG, -Q) in dual mode."""
        terms = classification_config['frobenius_terms'] if terms is None else terms
        if spec.mode == 'secondary':
            return cls(spec.data.omega, spec.hopf(), point, terms)
        Q = spec.hopf()
        dG = spec.data.G.derivative_expr()
        return cls(-(Q / dG), -Q, point, terms)

    def _chart(self):
        if is_infinity(self.point):
            return self.omega_hat.to_infinity_chart(1), self.q_hat.to_infinity_chart(2), 0j
        return self.omega_hat, self.q_hat, complex(self.point)

    def coefficients(self, count=None):
        """Taylor coefficients of x p(x) and x^2 q(x) in the local variable x, orders 0..count."""
        count = self.terms if count is None else count
        omega, q_hat, p = self._chart()
        d_omega = omega.differentiate()
        singular = omega.points() + q_hat.points()
        omega_at, d_omega_at, q_at = anchored(omega, p), anchored(d_omega, p), anchored(q_hat, p)

        def xp(z):
            return -(z - p) * d_omega_at(z) / omega_at(z)

        def x2q(z):
            return -(z - p) ** 2 * q_at(z)

        orders = list(range(-POLE_ORDERS, count + 1))
        p_coeffs, p_err = contour_coefficients(xp, p, orders, singular_points=singular)
        q_coeffs, q_err = contour_coefficients(x2q, p, orders, singular_points=singular)
        for name, values, error in (('p', p_coeffs, p_err), ('q', q_coeffs, q_err)):
            scale = max(1.0, float(np.max(np.abs(values[POLE_ORDERS:]))))
            excess = float(np.max(np.abs(values[:POLE_ORDERS])))
            if excess > max(POLE_TOL * scale, 10 * error):
                raise IrregularSingularPoint(
                    f"The coefficient {name} has a pole of too high order at {self.point} (excess {excess:.3e})")
        return np.asarray(p_coeffs[POLE_ORDERS:]), np.asarray(q_coeffs[POLE_ORDERS:])

    def indicial_roots(self):
        """Roots of r(r-1) + p0 r + q0 = 0, the larger real part first."""
        p_coeffs, q_coeffs = self.coefficients(0)
        roots = np.roots([1.0, p_coeffs[0] - 1.0, q_coeffs[0]]).astype(complex)
        roots = sorted(roots, key=lambda r: (r.real, r.imag), reverse=True)
        return complex(roots[0]), complex(roots[1])

    def root_difference(self):
        r1, r2 = self.indicial_roots()
        difference = r1 - r2
        if abs(difference.imag) > ROOT_TOL or not is_integral(difference.real, ROOT_TOL):
            raise BadParameter(f"Indicial roots {r1}, {r2} do not differ by an integer, no logarithmic term arises")
        return int(round(difference.real))


def log_term_coefficient(problem):
    """The obstruction to a second solution without logarithm, with c0 = 1 at the smaller indicial root.

    The recursion F(r2 + n) c_n = -sum_{k<n} [(r2 + k) p_{n-k} + q_{n-k}] c_k cannot be solved at
    n = N = r1 - r2; the right-hand side there is returned and vanishes iff no logarithm appears.
    """
    difference = problem.root_difference()
    if difference == 0:
        raise BadParameter("Equal indicial roots always give a logarithmic term")
    _, r2 = problem.indicial_roots()
    p_coeffs, q_coeffs = problem.coefficients(max(problem.terms, difference))

    def indicial(r):
        return r * (r - 1) + p_coeffs[0] * r + q_coeffs[0]

    c = [1.0 + 0j]
    for n in range(1, difference + 1):
        rhs = -sum(((r2 + k) * p_coeffs[n - k] + q_coeffs[n - k]) * c[k] for k in range(n))
        if n == difference:
            logger.debug("log term at %s: roots differ by %d, obstruction %s", problem.point, difference, rhs)
            return complex(rhs)
        c.append(rhs / indicial(r2 + n))
