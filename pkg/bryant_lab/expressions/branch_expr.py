import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from bryant_lab.config.settings import COEFF_FLOOR, PATH_CLEARANCE_FACTOR
from bryant_lab.errors import BadParameter, PathTooClose

logger = logging.getLogger(__name__)

POINT_TOL = 1e-12
EXPONENT_TOL = 1e-12
ROOT_CLUSTER_TOL = 1e-6


def is_integer_exponent(alpha):
    return abs(alpha - round(alpha)) < EXPONENT_TOL


def same_point(p, q, tol=POINT_TOL):
    return abs(p - q) <= tol * max(1.0, abs(p), abs(q))


def _merge_factors(factors):
    merged = []
    for point, exponent in factors:
        point = complex(point)
        exponent = float(exponent)
        for idx, (q, e) in enumerate(merged):
            if same_point(point, q):
                merged[idx] = (q, e + exponent)
                break
        else:
            merged.append((point, exponent))
    merged = [(p, round(e) if is_integer_exponent(e) else e) for p, e in merged]
    merged = [(p, float(e)) for p, e in merged if e != 0]
    return tuple(sorted(merged, key=lambda f: (f[0].real, f[0].imag)))


def _lookup_arg(args, p):
    if not args:
        return None
    for q, a in args.items():
        if same_point(p, q):
            return a
    return None


@dataclass(frozen=True)
class BranchTerm:
    """coeff * prod (z - point)**exponent."""
    coeff: complex
    factors: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'coeff', complex(self.coeff))
        object.__setattr__(self, 'factors', _merge_factors(self.factors))

    def exponent_at(self, p):
        for q, e in self.factors:
            if same_point(p, q):
                return e
        return 0.0

    def points(self):
        return [p for p, _ in self.factors]

    def exponent_key(self):
        return self.factors

    def scaled(self, c):
        return BranchTerm(self.coeff * c, self.factors)

    def __mul__(self, other):
        return BranchTerm(self.coeff * other.coeff, self.factors + other.factors)

    def inverse(self):
        if self.coeff == 0:
            raise ZeroDivisionError("cannot invert a zero term")
        return BranchTerm(1.0 / self.coeff, tuple((p, -e) for p, e in self.factors))

    def evaluate(self, z, args=None):
        z = np.asarray(z, dtype=complex)
        value = np.full(z.shape, self.coeff, dtype=complex)
        for p, e in self.factors:
            dz = z - p
            if is_integer_exponent(e):
                value = value * dz ** int(round(e))
            elif _lookup_arg(args, p) is not None:
                theta = _lookup_arg(args, p)
                value = value * np.abs(dz) ** e * np.exp(1j * e * theta)
            else:
                value = value * np.exp(e * np.log(dz))
        return value if value.ndim else complex(value)


def _collect(terms):
    buckets = {}
    order = []
    for term in terms:
        key = term.exponent_key()
        if key in buckets:
            buckets[key] += term.coeff
        else:
            buckets[key] = term.coeff
            order.append(key)
    collected = [BranchTerm(buckets[k], k) for k in order]
    if not collected:
        return ()
    scale = max(abs(t.coeff) for t in collected)
    kept = [t for t in collected if abs(t.coeff) > COEFF_FLOOR * scale and t.coeff != 0]
    return tuple(kept)


def _check_branch_class(terms):
    reference = {}
    for term in terms:
        for p, e in term.factors:
            for q, e0 in reference.items():
                if same_point(p, q):
                    if not is_integer_exponent(e - e0):
                        raise BadParameter(
                            f"Exponents {e0} and {e} at point {p} differ by a non-integer; "
                            "terms must share one branch class per point.")
                    break
            else:
                reference[p] = e


@dataclass(frozen=True)
class BranchExpr:
    """Finite sum of branch terms. Closed under +, *, and d/dz."""
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        terms = tuple(t if isinstance(t, BranchTerm) else BranchTerm(*t) for t in self.terms)
        terms = _collect(terms)
        _check_branch_class(terms)
        object.__setattr__(self, 'terms', terms)

    # --- construction ---------------------------------------------------------

    @classmethod
    def constant(cls, c):
        return cls((BranchTerm(c, ()),))

    @classmethod
    def monomial(cls, coeff, factors=()):
        return cls((BranchTerm(coeff, tuple(factors)),))

    @classmethod
    def from_polynomial(cls, coeffs):
        """Polynomial with coefficients lowest degree first, kept in expanded form."""
        terms = [BranchTerm(c, ((0j, k),)) for k, c in enumerate(coeffs) if c != 0]
        return cls(tuple(terms))

    @classmethod
    def from_rational(cls, num, den=(1.0,)):
        num = np.trim_zeros(np.asarray(num, dtype=complex), 'b')
        den = np.trim_zeros(np.asarray(den, dtype=complex), 'b')
        if den.size == 0:
            raise ZeroDivisionError("zero denominator")
        if num.size == 0:
            return cls(())
        coeff = num[-1] / den[-1]
        factors = [(r, 1) for r in _clustered_roots(num)]
        factors += [(r, -1) for r in _clustered_roots(den)]
        return cls((BranchTerm(coeff, tuple(factors)),))

    # --- queries ----------------------------------------------------------------

    def is_zero(self):
        return len(self.terms) == 0

    def points(self):
        pts = []
        for term in self.terms:
            for p in term.points():
                if not any(same_point(p, q) for q in pts):
                    pts.append(p)
        return sorted(pts, key=lambda p: (p.real, p.imag))

    def exponents_at(self, p):
        return [t.exponent_at(p) for t in self.terms]

    def branch_points(self):
        return [p for p in self.points() if not all(is_integer_exponent(e) for e in self.exponents_at(p))]

    def singular_points(self):
        """Branch points and poles; zeros of integer order are regular."""
        return [p for p in self.points()
                if any(not is_integer_exponent(e) or e < 0 for e in self.exponents_at(p))]

    def is_single_valued(self):
        return all(is_integer_exponent(e) for t in self.terms for _, e in t.factors)

    def is_single_term(self):
        return len(self.terms) == 1

    # --- algebra ------------------------------------------------------------------

    def __add__(self, other):
        other = _as_expr(other)
        return BranchExpr(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return BranchExpr(tuple(t.scaled(-1) for t in self.terms))

    def __sub__(self, other):
        return self + (-_as_expr(other))

    def __rsub__(self, other):
        return _as_expr(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return BranchExpr(tuple(t.scaled(other) for t in self.terms))
        other = _as_expr(other)
        return BranchExpr(tuple(a * b for a in self.terms for b in other.terms))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * (1.0 / other)
        other = _as_expr(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero expression")
        divisor = other.terms[0] if other.is_single_term() else other.factored().terms[0]
        inv = divisor.inverse()
        return BranchExpr(tuple(t * inv for t in self.terms))

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)) or k < 0:
            if not self.is_single_term():
                raise BadParameter("Non-integer powers need a single-term expression")
            term = self.terms[0]
            return BranchExpr.monomial(term.coeff ** k, tuple((p, e * k) for p, e in term.factors))
        result = BranchExpr.constant(1.0)
        for _ in range(int(k)):
            result = result * self
        return result

    def differentiate(self):
        out = []
        for term in self.terms:
            for idx, (p, e) in enumerate(term.factors):
                factors = list(term.factors)
                factors[idx] = (p, e - 1)
                out.append(BranchTerm(term.coeff * e, tuple(factors)))
        return BranchExpr(tuple(out))

    def factored(self):
        """Rewrite as a single term, factoring the integer-exponent polynomial part numerically."""
        if self.is_zero() or self.is_single_term():
            return self
        pts = self.points()
        base = {p: min(t.exponent_at(p) for t in self.terms) for p in pts}
        poly = np.zeros(1, dtype=complex)
        for term in self.terms:
            piece = np.array([term.coeff], dtype=complex)
            for p in pts:
                shift = int(round(term.exponent_at(p) - base[p]))
                if shift:
                    piece = P.polymul(piece, P.polypow([-p, 1.0], shift))
            poly = P.polyadd(poly, piece)
        poly = np.trim_zeros(poly, 'b')
        scale = max(abs(t.coeff) for t in self.terms)
        poly = np.where(np.abs(poly) > COEFF_FLOOR * scale, poly, 0)
        poly = np.trim_zeros(poly, 'b')
        if poly.size == 0:
            return BranchExpr(())
        factors = [(p, base[p]) for p in pts]
        roots = _clustered_roots(poly)
        for r in roots:
            match = next((p for p in pts if abs(r - p) <= ROOT_CLUSTER_TOL * max(1.0, abs(p))), None)
            factors.append((match if match is not None else r, 1))
        return BranchExpr.monomial(poly[-1], tuple(factors))

    # --- evaluation -----------------------------------------------------------

    def evaluate(self, z, args=None):
        """Principal-branch value, or the branch fixed by tracked arguments `args` (point -> arg)."""
        z = np.asarray(z, dtype=complex)
        total = np.zeros(z.shape, dtype=complex)
        for term in self.terms:
            total = total + term.evaluate(z, args)
        return total if total.ndim else complex(total)

    __call__ = evaluate

    def evaluate_tracked(self, z, state):
        return self.evaluate(z, state.arg_map())

    def to_infinity_chart(self, weight=0):
        """Coefficient of the same weight-k differential in the chart w = 1/z."""
        out = []
        sign = (-1.0) ** weight
        for term in self.terms:
            coeff = term.coeff * sign
            w_exponent = -2.0 * weight
            factors = []
            for p, e in term.factors:
                w_exponent -= e
                if p != 0:
                    coeff *= np.exp(e * np.log(-p)) if not is_integer_exponent(e) else (-p) ** int(round(e))
                    factors.append((1.0 / p, e))
            factors.append((0j, w_exponent))
            out.append(BranchTerm(coeff, tuple(factors)))
        return BranchExpr(tuple(out))

    # --- wire form ------------------------------------------------------------

    def to_json(self):
        return {
            'terms': [
                {
                    'coeff': [t.coeff.real, t.coeff.imag],
                    'factors': [{'point': [p.real, p.imag], 'exponent': e} for p, e in t.factors],
                }
                for t in self.terms
            ]
        }

    @classmethod
    def from_json(cls, data):
        terms = []
        for item in data['terms']:
            coeff = complex(*item['coeff'])
            factors = tuple((complex(*f['point']), float(f['exponent'])) for f in item['factors'])
            terms.append(BranchTerm(coeff, factors))
        return cls(tuple(terms))

    def __repr__(self):
        parts = []
        for t in self.terms:
            body = ''.join(f"(z-{p:.4g})^{e:g}" for p, e in t.factors)
            parts.append(f"{t.coeff:.6g}{body}")
        return "BranchExpr(" + " + ".join(parts or ["0"]) + ")"


def _as_expr(value):
    if isinstance(value, BranchExpr):
        return value
    if isinstance(value, BranchTerm):
        return BranchExpr((value,))
    return BranchExpr.constant(value)


def _clustered_roots(coeffs):
    coeffs = np.trim_zeros(np.asarray(coeffs, dtype=complex), 'b')
    if coeffs.size <= 1:
        return []
    roots = list(P.polyroots(coeffs))
    # multiple roots come back as a small cloud; snap each cloud to its mean
    clusters = []
    for r in roots:
        for c in clusters:
            if abs(np.mean(c) - r) <= ROOT_CLUSTER_TOL * max(1.0, abs(r)):
                c.append(r)
                break
        else:
            clusters.append([r])
    out = []
    for c in clusters:
        centre = complex(np.mean(c))
        if abs(centre.imag) < POINT_TOL * max(1.0, abs(centre)):
            centre = complex(centre.real, 0.0)
        out.extend([centre] * len(c))
    return out


# --- branch tracking -----------------------------------------------------------

def path_clearance(points):
    points = list(points)
    if len(points) < 2:
        return PATH_CLEARANCE_FACTOR
    arr = np.asarray(points, dtype=complex)
    diameter = np.max(np.abs(arr[:, None] - arr[None, :]))
    return PATH_CLEARANCE_FACTOR * max(diameter, 1.0)


def segment_distance(a, b, p):
    d = b - a
    if d == 0:
        return abs(p - a)
    t = ((p - a) * np.conj(d)).real / abs(d) ** 2
    t = min(1.0, max(0.0, t))
    return abs(a + t * d - p)


@dataclass(frozen=True)
class BranchState:
    """Continuously tracked arg(z - p) for each tracked point, at the current position."""
    position: complex
    points: tuple
    args: tuple

    @classmethod
    def start(cls, z0, points):
        points = tuple(complex(p) for p in points)
        args = tuple(float(np.angle(z0 - p)) for p in points)
        return cls(complex(z0), points, args)

    def arg_map(self):
        return dict(zip(self.points, self.args))

    def arg_of(self, p):
        for q, a in zip(self.points, self.args):
            if same_point(p, q):
                return a
        return float(np.angle(self.position - p))

    def advance(self, z, clearance=None):
        """Move along the straight segment from the current position to z."""
        z = complex(z)
        if clearance is not None:
            for p in self.points:
                if segment_distance(self.position, z, p) < clearance:
                    raise PathTooClose(f"Segment {self.position} -> {z} passes within {clearance:g} of {p}")
        args = tuple(a + float(np.angle((z - p) / (self.position - p))) for p, a in zip(self.points, self.args))
        return BranchState(z, self.points, args)

    def follow(self, path, clearance=None):
        state = self
        for z in path:
            state = state.advance(z, clearance)
        return state

    def windings(self, reference):
        return {p: (a - reference.arg_of(p)) / (2 * np.pi) for p, a in zip(self.points, self.args)}


def eval_continued(expr, path, state=None, clearance=None):
    """Value of expr at the end of a polyline, continued along it from the state at its start."""
    path = [complex(z) for z in path]
    if state is None:
        state = BranchState.start(path[0], expr.singular_points())
    if clearance is None:
        clearance = path_clearance(state.points)
    for p in state.points:
        if abs(path[0] - p) < clearance:
            raise PathTooClose(f"Path start {path[0]} lies within {clearance:g} of {p}")
    state = state.follow(path, clearance)
    logger.debug("continued %s along %d vertices", expr, len(path))
    return expr.evaluate_tracked(state.position, state), state
