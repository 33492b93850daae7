import logging

import numpy as np
from joblib import Parallel, delayed
from scipy.special import roots_legendre

from bryant_lab.config.settings import quadrature_config
from bryant_lab.errors import DivergentEnd, InvalidDivisor
from bryant_lab.expressions.branch_expr import path_clearance
from bryant_lab.expressions.calculus import is_infinity
from bryant_lab.holonomy.gauss_maps import divisor_from_spec
from bryant_lab.holonomy.lift import LiftIntegrator
from bryant_lab.holonomy.monodromy import unitarizability_of, unitarized_frame
from bryant_lab.holonomy.paths import SampleTree, route

logger = logging.getLogger(__name__)

WHICH = ('primal', 'dual')
MAX_GRADING = 40
NODE_FLOOR = 1e-12
OFFSET_TRIALS = 17
INNER, OUTER = 1.25, 1.75


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def grading(order):
    """Radial grading k of the patch r = r0 s^k, so that r^(2 order + 1) dr is smooth enough in s."""
    return int(np.clip(np.ceil(4.0 / (2 * order + 2)), 1, MAX_GRADING))


def fubini_study(h, dh):
    """4|h'|^2 / (1 + |h|^2)^2, rewritten in 1/h where |h| > 1."""
    h = np.asarray(h, dtype=complex)
    dh = np.asarray(dh, dtype=complex)
    big = np.abs(h) > 1
    small_h = np.where(big, 0, h)
    inv = 1 / np.where(big, h, 1)
    near = 4 * np.abs(dh) ** 2 / (1 + np.abs(small_h) ** 2) ** 2
    far = 4 * np.abs(dh * inv * inv) ** 2 / (1 + np.abs(inv) ** 2) ** 2
    return np.where(big, far, near)


class _Disk:
    """A puncture patch: the cutoff is 1 inside radius/2 and 0 outside radius."""

    def __init__(self, center, radius, order):
        self.center = complex(center)
        self.radius = float(radius)
        self.order = order

    def cutoff(self, z):
        r = np.abs(np.asarray(z) - self.center)
        return 1.0 - smooth_step((r - self.radius / 2) / (self.radius / 2))


class _Layout:
    """Quadrature nodes on one spanning tree rooted at the basepoint, with fine and coarse weights."""

    def __init__(self, root, special, clearance):
        self.tree = SampleTree(root)
        self.weights = [0.0]
        self.coarse = [0.0]
        self.special = list(special)
        self.clearance = clearance
        self.dropped = 0

    def add(self, z, parent, weight=0.0, coarse=0.0):
        index = self.tree.add(z, parent)
        self.weights.append(weight)
        self.coarse.append(coarse)
        return index

    def connect(self, target, margin):
        index = route(self.tree, target, self.special, self.clearance, margin)
        missing = len(self.tree) - len(self.weights)
        self.weights.extend([0.0] * missing)
        self.coarse.extend([0.0] * missing)
        return index

    def arrays(self):
        return (np.asarray(self.tree.nodes), np.asarray(self.weights, dtype=float),
                np.asarray(self.coarse, dtype=float))


def _scale(special):
    return max([1.0] + [abs(p) for p in special])


def _grid_offset(coords, values, h, clearance):
    values = np.asarray(values, dtype=float)
    if len(values) == 0:
        return 0.0
    best, best_gap = 0.0, -1.0
    for k in range(OFFSET_TRIALS):
        shift = (k / OFFSET_TRIALS - 0.5) * h
        gap = float(np.min(np.abs(values[:, None] - (coords + shift)[None, :])))
        if gap > best_gap:
            best, best_gap = shift, gap
    if best_gap <= 2 * clearance:
        logger.warning("grid lines pass within %.2e of a singular point", best_gap)
    return best


def _outside_weight(z, disks, outer):
    cut = smooth_step((np.abs(z) - INNER * outer) / ((OUTER - INNER) * outer))
    for disk in disks:
        cut = cut + disk.cutoff(z)
    return 1.0 - cut


def _add_grid(layout, outer, nodes, disks):
    """Midpoint rule on [-2 outer, 2 outer]^2, spoke to the nearest node, then one column, then rows."""
    h = 4.0 * outer / nodes
    coords = -2.0 * outer + (np.arange(nodes) + 0.5) * h
    finite = [p for p in layout.special if not is_infinity(p)]
    xs = coords + _grid_offset(coords, [p.real for p in finite], h, layout.clearance)
    ys = coords + _grid_offset(coords, [p.imag for p in finite], h, layout.clearance)
    root = layout.tree.nodes[0]
    i0 = int(np.argmin(np.abs(xs - root.real)))
    j0 = int(np.argmin(np.abs(ys - root.imag)))

    factors = _outside_weight(xs[:, None] + 1j * ys[None, :], disks, outer)

    def weights(i, j):
        factor = float(factors[i, j])
        coarse = 4 * h * h * factor if i % 2 == 0 and j % 2 == 0 else 0.0
        return h * h * factor, coarse

    index = {}
    start = layout.connect(xs[i0] + 1j * ys[j0], max(2 * layout.clearance, h))
    layout.weights[start], layout.coarse[start] = weights(i0, j0)
    index[i0, j0] = start
    for step in (1, -1):
        parent = start
        for j in range(j0 + step, nodes if step > 0 else -1, step):
            parent = layout.add(xs[i0] + 1j * ys[j], parent, *weights(i0, j))
            index[i0, j] = parent
    for j in range(nodes):
        for step in (1, -1):
            parent = index[i0, j]
            for i in range(i0 + step, nodes if step > 0 else -1, step):
                parent = layout.add(xs[i] + 1j * ys[j], parent, *weights(i, j))
                index[i, j] = parent


def _add_polar(layout, center, radius, order, config, cutoff, infinite=False):
    """Graded polar patch: ring chain at the outer radius, then rays of Gauss-Legendre nodes.

    At infinity the patch lives in w = 1/z and the rays run outward in z.
    """
    k = grading(order)
    s, ws = roots_legendre(config['radial_nodes'])
    s, ws = (s + 1) / 2, ws / 2
    order_idx = np.argsort(-s)
    s, ws = s[order_idx], ws[order_idx]
    n_theta = config['angular_nodes']
    root = layout.tree.nodes[0]
    theta0 = float(np.angle(root - center)) if not infinite else -float(np.angle(root))
    thetas = theta0 + 2 * np.pi * np.arange(n_theta) / n_theta
    dtheta = 2 * np.pi / n_theta

    def place(r, theta):
        return 1.0 / (r * np.exp(1j * theta)) if infinite else center + r * np.exp(1j * theta)

    ring = [layout.connect(place(radius, thetas[0]), max(2 * layout.clearance, 0.25 * radius))]
    ring += layout.tree.add_chain([place(radius, t) for t in thetas[1:]], ring[0])
    missing = len(layout.tree) - len(layout.weights)
    layout.weights.extend([0.0] * missing)
    layout.coarse.extend([0.0] * missing)
    floor = NODE_FLOOR * (radius if infinite else max(1.0, abs(center)))
    for m, (theta, parent) in enumerate(zip(thetas, ring)):
        for si, wi in zip(s, ws):
            r = radius * si ** k
            if r < floor:
                layout.dropped += 1
                continue
            z = place(r, theta)
            weight = dtheta * wi * radius ** 2 * k * si ** (2 * k - 1) * float(cutoff(z))
            if infinite:
                weight /= r ** 4
            coarse = 2 * weight if m % 2 == 0 else 0.0
            parent = layout.add(z, parent, weight, coarse)


def _conical_orders(spec, which):
    if spec.hopf().is_zero():
        return [0.0] * len(spec.punctures)
    divisor = divisor_from_spec(spec)
    return [float(end.mu if which == 'primal' else end.mu_sharp) for end in divisor.ends]


def _build_layout(spec, orders, config, outer=None, grid_nodes=None, shrink=1.0):
    special = spec.special_points()
    clearance = path_clearance(special)
    scale = _scale(special)
    outer = scale if outer is None else outer
    layout = _Layout(spec.basepoint, special, clearance)
    disks, patches = [], []
    for p, order in zip(spec.punctures, orders):
        if is_infinity(p):
            continue
        others = [abs(p - q) for q in special if abs(p - q) > 1e-12]
        radius = min(quadrature_config['disk_factor'] * min(others + [np.inf]), 0.2 * scale)
        disk = _Disk(p, radius * (shrink if np.isinf(order) else 1.0), order)
        disks.append(disk)
        if not np.isinf(order):
            patches.append(disk)
    _add_grid(layout, outer, grid_nodes or config['grid_nodes'], disks)
    for disk in patches:
        _add_polar(layout, disk.center, disk.radius, disk.order, config, disk.cutoff)
    return layout, disks, outer


def _add_infinity(layout, outer, order, config):
    radius = 1.0 / (INNER * outer)

    def cutoff(z):
        return smooth_step((np.abs(z) - INNER * outer) / ((OUTER - INNER) * outer))

    _add_polar(layout, 0j, radius, order, config, cutoff, infinite=True)


def _direct(spec, which):
    data = spec.data
    if spec.mode == 'dual' and which == 'dual':
        return True
    return spec.mode == 'secondary' and which == 'primal' and data.g_expr is not None and data.g_expr.is_single_term()


def _density_direct(spec, which, z):
    data = spec.data
    if spec.mode == 'dual':
        return fubini_study(data.G.evaluate(z), data.G.derivative().evaluate(z))
    return fubini_study(data.g_expr.evaluate(z), data.gprime.evaluate(z))


def _density_from_tree(spec, which, nodes, frames, args, gs, integrator):
    data = spec.data
    if spec.mode == 'dual':
        G = np.asarray(data.G.evaluate(nodes), dtype=complex)
        dG = np.asarray(data.G.derivative().evaluate(nodes), dtype=complex)
        big = np.abs(G) > 1
        u = 1 / np.where(big, G, 1)
        F11, F12, F21, F22 = frames[:, 0, 0], frames[:, 0, 1], frames[:, 1, 0], frames[:, 1, 1]
        small = (np.abs(F11 - G * F21) ** 2 + np.abs(F12 - G * F22) ** 2) ** 2
        large = (np.abs(u * F11 - F21) ** 2 + np.abs(u * F12 - F22) ** 2) ** 2
        return np.where(big, 4 * np.abs(dG * u * u) ** 2 / large,
                        4 * np.abs(np.where(big, 0, dG)) ** 2 / np.where(big, 1, small))
    arg_map = {p: args[:, k] for k, p in enumerate(integrator.points)}
    dg = np.asarray(data.gprime.evaluate(nodes, arg_map), dtype=complex)
    if which == 'primal':
        return fubini_study(gs, dg)
    big = np.abs(gs) > 1
    u = 1 / np.where(big, gs, 1)
    g_small = np.where(big, 0, gs)
    F11, F12, F21, F22 = frames[:, 0, 0], frames[:, 0, 1], frames[:, 1, 0], frames[:, 1, 1]
    small = (np.abs(F11 * g_small + F12) ** 2 + np.abs(F21 * g_small + F22) ** 2) ** 2
    large = (np.abs(F11 + F12 * u) ** 2 + np.abs(F21 + F22 * u) ** 2) ** 2
    return np.where(big, 4 * np.abs(dg * u * u) ** 2 / large, 4 * np.abs(dg) ** 2 / small)


def _integrate(spec, which, layout, conjugator):
    nodes, weights, coarse = layout.arrays()
    if _direct(spec, which):
        density = _density_direct(spec, which, nodes)
    else:
        integrator = LiftIntegrator(spec, clearance=0.0)
        tree = layout.tree
        frames, args, gs = integrator.transport_tree(nodes, tree.parents, tree.levels(),
                                                     unitarized_frame(spec, conjugator))
        density = _density_from_tree(spec, which, nodes, frames, args, gs, integrator)
    live = weights > 0
    if not np.all(np.isfinite(density[live])):
        raise DivergentEnd(f"The {which} density is not finite at {int(np.sum(~np.isfinite(density[live])))} node(s)")
    fine = float(np.sum(weights[live] * density[live]))
    rough = float(np.sum(coarse[live] * density[live]))
    return fine, abs(fine - rough), int(np.sum(live))


def _partial_sum(spec, which, orders, config, conjugator, level):
    scale = _scale(spec.special_points())
    nodes = config['grid_nodes'] // 2 | 1
    layout, _, _ = _build_layout(spec, orders, config, outer=scale * 2 ** level, grid_nodes=nodes,
                                 shrink=2.0 ** -level)
    value, _, _ = _integrate(spec, which, layout, conjugator)
    return value


def ta_quadrature(spec, which='primal', jobs=1, config=quadrature_config):
    """Area of the image of g (primal) or G (dual) under the Fubini-Study metric.

    The sphere is covered by a midpoint grid, graded polar patches at the finite ends and one
    at infinity, glued by a smooth partition of unity; the error estimate compares against
    the same rule on every other grid line and angle.
    """
    if which not in WHICH:
        raise ValueError(f"Unsupported Gauss map {which}. Choose one of {WHICH}.")
    if spec.hopf().is_zero():
        logger.info("%s is totally umbilic; its Gauss maps are constant", spec.name or 'the surface')
        return {'value': 0.0, 'error': 0.0, 'value_over_pi': 0.0, 'method': 'quadrature', 'which': which,
                'divergent': False, 'period_closed': None}
    orders = _conical_orders(spec, which)
    for p, order in zip(spec.punctures, orders):
        if np.isnan(order):
            raise InvalidDivisor(f"The {which} conical order at {p} is undefined")
        if not np.isinf(order) and order <= -1:
            raise DivergentEnd(f"Conical order {order} at {p} makes the {which} density non-integrable")
    conjugator, period_closed = None, None
    if not _direct(spec, which):
        unitary, _ = unitarizability_of(spec, jobs=jobs)
        conjugator = unitary.conjugator
        period_closed = conjugator is not None
        if not period_closed:
            logger.warning("monodromy of %s is not unitarizable (defect %.3e); the density depends on the tree",
                           spec.name, unitary.defect)
    if any(np.isinf(order) for order in orders):
        levels = range(config['partial_sum_levels'])
        if jobs == 1:
            sums = [_partial_sum(spec, which, orders, config, conjugator, k) for k in levels]
        else:
            sums = Parallel(n_jobs=jobs)(delayed(_partial_sum)(spec, which, orders, config, conjugator, k)
                                         for k in levels)
        growing = (all(b > a * (1 + config['rel_tol']) for a, b in zip(sums, sums[1:]))
                   or sums[-1] > config['divergence_cap'])
        logger.info("irregular end: partial sums %s", sums)
        return {'value': float(np.inf), 'error': None, 'value_over_pi': float(np.inf), 'method': 'quadrature',
                'which': which, 'divergent': True, 'growing': bool(growing), 'partial_sums': sums,
                'period_closed': period_closed}
    layout, _, outer = _build_layout(spec, orders, config)
    infinite = [order for p, order in zip(spec.punctures, orders) if is_infinity(p)]
    _add_infinity(layout, outer, infinite[0] if infinite else 0.0, config)
    value, error, count = _integrate(spec, which, layout, conjugator)
    if layout.dropped:
        logger.debug("%d patch node(s) below the radius floor were skipped", layout.dropped)
    if error > config['rel_tol'] * max(abs(value), 1.0):
        logger.warning("quadrature of %s (%s) has estimated error %.3e on %.6g", spec.name, which, error, value)
    return {'value': value, 'error': error, 'value_over_pi': value / np.pi, 'method': 'quadrature',
            'which': which, 'divergent': False, 'period_closed': period_closed, 'nodes': count,
            'gradings': [grading(o) for o in orders]}
