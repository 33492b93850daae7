import logging
from dataclasses import dataclass, field, replace

import numpy as np

from bryant_lab.errors import BadParameter, LogarithmicTerm, NotDualizable
from bryant_lab.expressions.branch_expr import BranchExpr, _clustered_roots, path_clearance, same_point
from bryant_lab.expressions.calculus import is_infinity, local_exponent
from bryant_lab.expressions.rational_map import INFINITY, RationalMap
from bryant_lab.linalg.sl2c import IDENTITY, diag_scaling, matrix_from_json, matrix_to_json, sl2_inverse

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SecondaryData:
    """Weierstrass data (g, omega): dF = F [[g, -g^2], [1, -g]] omega.

    When g_expr is None the value of g is carried along paths from g_base.
    """
    gprime: BranchExpr
    omega: BranchExpr
    g_base: complex = 0j
    g_expr: BranchExpr = None

    mode = 'secondary'

    def hopf(self):
        return self.gprime * self.omega

    def expressions(self):
        return [e for e in (self.gprime, self.omega, self.g_expr) if e is not None]

    def to_json(self):
        return {
            'gprime': self.gprime.to_json(),
            'omega': self.omega.to_json(),
            'g_base': [self.g_base.real, self.g_base.imag],
            'g_expr': None if self.g_expr is None else self.g_expr.to_json(),
        }

    @classmethod
    def from_json(cls, data):
        g_expr = data.get('g_expr')
        return cls(BranchExpr.from_json(data['gprime']), BranchExpr.from_json(data['omega']),
                   complex(*data.get('g_base', [0.0, 0.0])),
                   None if g_expr is None else BranchExpr.from_json(g_expr))


@dataclass(frozen=True, eq=False)
class DualData:
    """Hyperbolic Gauss map G and Hopf differential Q: dF F^-1 = (Q/dG) [[G, -G^2], [1, -G]]."""
    G: RationalMap
    Q: BranchExpr

    mode = 'dual'

    def hopf(self):
        return self.Q

    def expressions(self):
        return [self.Q]

    def to_json(self):
        return {'G': self.G.to_json(), 'Q': self.Q.to_json()}

    @classmethod
    def from_json(cls, data):
        return cls(RationalMap.from_json(data['G']), BranchExpr.from_json(data['Q']))


def _point_to_json(p):
    return 'inf' if is_infinity(p) else [p.real, p.imag]


def _point_from_json(p):
    return INFINITY if p == 'inf' else complex(*p)


@dataclass(frozen=True, eq=False)
class SurfaceSpec:
    punctures: tuple
    data: object
    basepoint: complex
    initial_frame: np.ndarray = field(default_factory=lambda: IDENTITY.copy())
    genus: int = 0
    name: str = ''
    params: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        punctures = tuple(INFINITY if is_infinity(p) else complex(p) for p in self.punctures)
        object.__setattr__(self, 'punctures', punctures)
        object.__setattr__(self, 'basepoint', complex(self.basepoint))
        object.__setattr__(self, 'initial_frame', np.asarray(self.initial_frame, dtype=complex))
        if self.genus != 0:
            raise BadParameter("Only genus 0 domains are supported")
        if not self.hopf().is_single_valued():
            raise BadParameter("The Hopf differential must have integer exponents only")
        clearance = path_clearance(self.special_points())
        for p in self.special_points():
            if abs(self.basepoint - p) < clearance:
                raise BadParameter(f"Basepoint {self.basepoint} is too close to the singular point {p}")

    @property
    def mode(self):
        return self.data.mode

    def hopf(self):
        return self.data.hopf()

    def finite_punctures(self):
        return [p for p in self.punctures if not is_infinity(p)]

    def has_infinite_end(self):
        return any(is_infinity(p) for p in self.punctures)

    def tracked_points(self):
        pts = []
        for expr in self.data.expressions():
            for p in expr.points():
                if not any(same_point(p, q) for q in pts):
                    pts.append(p)
        return pts

    def branch_points(self):
        pts = []
        for expr in self.data.expressions():
            for p in expr.branch_points():
                if not any(same_point(p, q) for q in pts):
                    pts.append(p)
        return pts

    def special_points(self):
        """Punctures, branch points and poles of the data, and in dual mode the branch points of G.

        Regular zeros (umbilics, zeros of g) are tracked but not special.
        """
        pts = list(self.finite_punctures())
        candidates = [p for expr in self.data.expressions() for p in expr.singular_points()]
        if self.mode == 'dual':
            candidates += _clustered_roots(self.data.G.wronskian())
        for p in candidates:
            if not any(same_point(p, q, 1e-9) for q in pts):
                pts.append(p)
        return pts

    def with_params(self, **changes):
        return replace(self, **changes)

    def to_json(self):
        return {
            'name': self.name,
            'genus': self.genus,
            'punctures': [_point_to_json(p) for p in self.punctures],
            'basepoint': [self.basepoint.real, self.basepoint.imag],
            'initial_frame': matrix_to_json(self.initial_frame),
            'mode': self.mode,
            'data': self.data.to_json(),
            'params': dict(self.params),
            'metadata': dict(self.metadata),
        }

    @classmethod
    def from_json(cls, payload):
        data_cls = SecondaryData if payload['mode'] == 'secondary' else DualData
        return cls(
            punctures=tuple(_point_from_json(p) for p in payload['punctures']),
            data=data_cls.from_json(payload['data']),
            basepoint=complex(*payload['basepoint']),
            initial_frame=matrix_from_json(payload.get('initial_frame', matrix_to_json(IDENTITY))),
            genus=payload.get('genus', 0),
            name=payload.get('name', ''),
            params=payload.get('params', {}),
            metadata=payload.get('metadata', {}),
        )


def _inverse_frame(F):
    return sl2_inverse(F)


def dual_spec(spec):
    """Spec of the dual surface: secondary Gauss map G, Hopf differential -Q, lift F^-1."""
    data = spec.data
    metadata = {'dual_of': spec.name}
    if spec.mode == 'dual':
        dG = data.G.derivative_expr()
        secondary = SecondaryData(gprime=dG, omega=-data.Q / dG, g_base=data.G(spec.basepoint),
                                  g_expr=data.G.to_branch_expr())
        return replace(spec, data=secondary, initial_frame=_inverse_frame(spec.initial_frame),
                       name=f"{spec.name}#", metadata=metadata)
    if data.g_expr is not None and data.g_expr.is_single_valued():
        G = RationalMap(*_expr_to_polys(data.g_expr))
    else:
        if not data.gprime.is_single_valued():
            raise NotDualizable("g is multi-valued on M; the dual is only defined when g is single-valued")
        try:
            G = RationalMap.from_derivative(data.gprime)
        except LogarithmicTerm as exc:
            raise NotDualizable(f"g is multi-valued on M: {exc}") from exc
        shift = data.g_base - G(spec.basepoint)
        G = RationalMap(np.polynomial.polynomial.polyadd(G.num, shift * G.den), G.den)
    dual = DualData(G=G, Q=-data.hopf())
    return replace(spec, data=dual, initial_frame=_inverse_frame(spec.initial_frame),
                   name=f"{spec.name}#", metadata=metadata)


def _expr_to_polys(expr):
    """Numerator and denominator polynomials of a single-valued expression."""
    P = np.polynomial.polynomial
    num_total = np.zeros(1, dtype=complex)
    pts = expr.points()
    base = {p: min(min(expr.exponents_at(p)), 0) for p in pts}
    den = np.ones(1, dtype=complex)
    for p in pts:
        if base[p] < 0:
            den = P.polymul(den, P.polypow([-p, 1.0], int(round(-base[p]))))
    for term in expr.terms:
        piece = np.array([term.coeff], dtype=complex)
        for p in pts:
            power = int(round(term.exponent_at(p) - base[p]))
            if power:
                piece = P.polymul(piece, P.polypow([-p, 1.0], power))
        num_total = P.polyadd(num_total, piece)
    return num_total, den


def check_compat(G, Q, punctures=()):
    """Report points where ord Q differs from the branching order of G, and ends failing completeness."""
    ends = [INFINITY if is_infinity(p) else complex(p) for p in punctures]
    report = {'condition1': [], 'completeness': [], 'compatible': True}
    candidates = [p for p, _ in G.branch_points()]
    for p in Q.points():
        if not any(same_point(p, q, 1e-9) for q in candidates):
            candidates.append(p)
    if not any(is_infinity(q) for q in candidates):
        candidates.append(INFINITY)

    def is_end(p):
        return any((is_infinity(p) and is_infinity(q)) or (not is_infinity(p) and not is_infinity(q)
                                                               and same_point(p, q, 1e-9)) for q in ends)

    for p in candidates:
        if is_end(p):
            continue
        order = local_exponent(Q, p, weight=2)
        branching = G.branching_order(p)
        if order != branching:
            report['condition1'].append({'point': _point_to_json(p), 'ord_Q': order, 'branching': branching})
    for p in ends:
        d = local_exponent(Q, p, weight=2)
        branching = G.branching_order(p)
        if branching - d < 2:
            report['completeness'].append({'point': _point_to_json(p), 'ord_Q': d, 'branching': branching})
    report['compatible'] = not report['condition1'] and not report['completeness']
    logger.debug("compatibility report: %s", report)
    return report


def reducible_deformation(spec, t):
    """g -> t g, the diag(t^(1/2), t^(-1/2)) star action; Q is unchanged."""
    if spec.mode != 'secondary':
        raise BadParameter("The reducible deformation acts on secondary Gauss map data")
    if t == 0:
        raise BadParameter("t must be nonzero")
    data = spec.data
    scaled = SecondaryData(gprime=data.gprime * t, omega=data.omega / t, g_base=data.g_base * t,
                           g_expr=None if data.g_expr is None else data.g_expr * t)
    a = diag_scaling(t)
    params = dict(spec.params, t=t)
    return replace(spec, data=scaled, params=params, initial_frame=spec.initial_frame @ np.linalg.inv(a))
