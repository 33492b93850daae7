import logging
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from bryant_lab.errors import ConstantMap, LogarithmicTerm, NonIntegerExponent
from bryant_lab.expressions.branch_expr import BranchExpr, _clustered_roots, is_integer_exponent
from bryant_lab.expressions.calculus import is_infinity, laurent_coefficients, local_exponent

logger = logging.getLogger(__name__)

INFINITY = complex(np.inf, 0)
ZERO_TOL = 1e-9


def _trim(coeffs, tol=0.0):
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.size and tol:
        scale = np.max(np.abs(coeffs))
        coeffs = np.where(np.abs(coeffs) > tol * scale, coeffs, 0)
    coeffs = np.trim_zeros(coeffs, 'b')
    return coeffs if coeffs.size else np.zeros(1, dtype=complex)


def _degree(coeffs):
    return len(_trim(coeffs)) - 1


def _order_of_zero(coeffs, p, tol=ZERO_TOL):
    coeffs = _trim(coeffs)
    scale = np.max(np.abs(coeffs))
    if scale == 0:
        return np.inf
    order = 0
    while len(coeffs) > 1 and abs(P.polyval(p, coeffs)) <= tol * scale * max(1.0, abs(p)) ** (len(coeffs) - 1):
        coeffs, _ = P.polydiv(coeffs, [-p, 1.0])
        order += 1
    return order


@dataclass(frozen=True, eq=False)
class RationalMap:
    """G = num/den with polynomial coefficients stored lowest degree first."""
    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'num', _trim(self.num))
        object.__setattr__(self, 'den', _trim(self.den))

    @classmethod
    def polynomial(cls, coeffs):
        return cls(np.asarray(coeffs, dtype=complex), np.ones(1, dtype=complex))

    @classmethod
    def power(cls, k, scale=1.0):
        coeffs = np.zeros(k + 1, dtype=complex)
        coeffs[k] = scale
        return cls.polynomial(coeffs)

    def evaluate(self, z):
        if np.ndim(z) == 0 and is_infinity(z):
            dn, dd = _degree(self.num), _degree(self.den)
            if dn > dd:
                return INFINITY
            if dn < dd:
                return 0j
            return complex(self.num[dn] / self.den[dd])
        z = np.asarray(z, dtype=complex)
        num = P.polyval(z, self.num)
        den = P.polyval(z, self.den)
        with np.errstate(divide='ignore', invalid='ignore'):
            value = np.where(den == 0, INFINITY, num / np.where(den == 0, 1, den))
        return value if value.ndim else complex(value)

    __call__ = evaluate

    def wronskian(self):
        """P'R - PR'; its zeros are the finite branch points."""
        return _trim(P.polysub(P.polymul(P.polyder(self.num), self.den),
                               P.polymul(self.num, P.polyder(self.den))), tol=1e-14)

    def derivative(self):
        return RationalMap(self.wronskian(), P.polymul(self.den, self.den))

    def derivative_expr(self):
        return BranchExpr.from_rational(self.wronskian(), P.polymul(self.den, self.den))

    def to_branch_expr(self):
        return BranchExpr.from_rational(self.num, self.den)

    def reduced(self):
        num_roots = _clustered_roots(self.num)
        den_roots = _clustered_roots(self.den)
        common = []
        remaining = list(den_roots)
        for r in num_roots:
            match = next((s for s in remaining if abs(r - s) <= 1e-8 * max(1.0, abs(r))), None)
            if match is not None:
                remaining.remove(match)
                common.append(r)
        if not common:
            return self
        num, den = self.num, self.den
        for r in common:
            num, _ = P.polydiv(num, [-r, 1.0])
            den, _ = P.polydiv(den, [-r, 1.0])
        logger.debug("cancelled %d common roots", len(common))
        return RationalMap(num, den)

    def degree(self):
        G = self.reduced()
        if not np.any(np.abs(G.wronskian()) > 0):
            raise ConstantMap("G is constant")
        return max(_degree(G.num), _degree(G.den))

    def branching_order(self, p):
        G = self.reduced()
        W = G.wronskian()
        if is_infinity(p):
            return 2 * G.degree() - 2 - _degree(W)
        return _order_of_zero(W, complex(p))

    def branch_points(self):
        G = self.reduced()
        W = G.wronskian()
        seen = []
        for r in _clustered_roots(W):
            if not any(abs(r - s) <= 1e-6 * max(1.0, abs(s)) for s, _ in seen):
                seen.append((r, G.branching_order(r)))
        infinite = G.branching_order(INFINITY)
        if infinite > 0:
            seen.append((INFINITY, infinite))
        return seen

    def star(self, a):
        a = np.asarray(a, dtype=complex)
        num = P.polyadd(a[0, 0] * self.num, a[0, 1] * self.den)
        den = P.polyadd(a[1, 0] * self.num, a[1, 1] * self.den)
        return RationalMap(num, den)

    def to_json(self):
        return {'num': [[c.real, c.imag] for c in self.num], 'den': [[c.real, c.imag] for c in self.den]}

    @classmethod
    def from_json(cls, data):
        return cls(np.array([complex(*c) for c in data['num']]), np.array([complex(*c) for c in data['den']]))

    @classmethod
    def from_derivative(cls, dG, constant=0.0, residue_tol=1e-8):
        """Integrate a rational derivative by its principal parts; a nonzero residue raises LogarithmicTerm."""
        if not dG.is_single_valued():
            raise NonIntegerExponent("dG must have integer exponents only")
        poles = []
        for p in dG.points():
            k = -min(dG.exponents_at(p))
            if k > 0 and is_integer_exponent(k):
                poles.append((p, int(round(k))))
        principal = []
        for p, k in poles:
            orders = list(range(-k, 0))
            coeffs, error = laurent_coefficients(dG, p, orders)
            scale = max(np.max(np.abs(coeffs)), 1.0)
            if abs(coeffs[-1]) > max(residue_tol * scale, 10 * error):
                raise LogarithmicTerm(f"dG has residue {coeffs[-1]:.3e} at {p}")
            # term c_{-j} (z-p)^{-j} integrates to c_{-j}/(1-j) (z-p)^{1-j}
            parts = {j - 1: coeffs[k - j] / (1 - j) for j in range(2, k + 1)}
            principal.append((p, k - 1, parts))
        top = -local_exponent(dG, INFINITY, weight=1) - 2
        poly = np.zeros(1, dtype=complex)
        if top >= 0:
            top = int(round(top))
            h, _ = laurent_coefficients(dG, INFINITY, [-m - 2 for m in range(top + 1)], weight=1)
            d = -np.asarray(h)
            poly = np.zeros(top + 2, dtype=complex)
            for m in range(top + 1):
                poly[m + 1] = d[m] / (m + 1)
        poly[0] += constant
        den = np.ones(1, dtype=complex)
        for p, order, _ in principal:
            den = P.polymul(den, P.polypow([-p, 1.0], order))
        num = P.polymul(poly, den)
        for p, order, parts in principal:
            rest = np.ones(1, dtype=complex)
            for q, other_order, _ in principal:
                if q != p:
                    rest = P.polymul(rest, P.polypow([-q, 1.0], other_order))
            for j, c in parts.items():
                piece = P.polymul(rest, P.polypow([-p, 1.0], order - j)) * c
                num = P.polyadd(num, piece)
        return cls(_trim(num, tol=1e-13), den)

    def __repr__(self):
        return f"RationalMap(num={np.round(self.num, 10).tolist()}, den={np.round(self.den, 10).tolist()})"
