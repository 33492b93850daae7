import logging
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import solve_ivp

from bryant_lab.config.settings import integrator_config
from bryant_lab.errors import PathTooClose, SingularPoint, StepSizeUnderflow
from bryant_lab.expressions.branch_expr import BranchState, path_clearance, segment_distance

logger = logging.getLogger(__name__)

SAMPLES_PER_SEGMENT = 17


@dataclass(frozen=True, eq=False)
class LiftResult:
    frame: np.ndarray
    state: BranchState
    g: complex = None


def _nilpotent(g):
    """[[g, -g^2], [1, -g]] for an array of g values."""
    g = np.asarray(g, dtype=complex)
    out = np.empty(g.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = g
    out[..., 0, 1] = -g * g
    out[..., 1, 0] = 1.0
    out[..., 1, 1] = -g
    return out


def _nilpotent_inverted(h):
    """[[h, -1], [h^2, -h]], the same matrix written in h = 1/g."""
    h = np.asarray(h, dtype=complex)
    out = np.empty(h.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = h
    out[..., 0, 1] = -1.0
    out[..., 1, 0] = h * h
    out[..., 1, 1] = -h
    return out


class LiftIntegrator:
    """Integrates the lift ODE for one surface spec along polylines and trees of segments."""

    def __init__(self, spec, config=integrator_config, clearance=None):
        self.spec = spec
        self.config = config
        self.points = spec.branch_points()
        self.special = spec.special_points()
        self.clearance = path_clearance(self.special) if clearance is None else clearance
        data = spec.data
        if spec.mode == 'dual':
            self.kind = 'dual'
            self.wronskian = data.G.wronskian()
        elif data.g_expr is not None:
            self.kind = 'explicit'
        else:
            self.kind = 'augmented'

    # --- coefficient --------------------------------------------------------------

    def segment_args(self, z, a, args_a):
        """Tracked arguments at z, continued along the straight segment from a."""
        z = np.asarray(z, dtype=complex)
        a = np.asarray(a, dtype=complex)
        args_a = np.asarray(args_a, dtype=float)
        return {p: args_a[..., k] + np.angle((z - p) / (a - p)) for k, p in enumerate(self.points)}

    def coefficient(self, z, args=None, g=None, inverted=False):
        """A(z) with dF = F A dz (secondary data) or dF = A F dz (dual data)."""
        data = self.spec.data
        z = np.asarray(z, dtype=complex)
        if self.kind == 'dual':
            num, den = data.G.num, data.G.den
            Pz, Rz = P.polyval(z, num), P.polyval(z, den)
            W = P.polyval(z, self.wronskian)
            if np.any(W == 0):
                raise SingularPoint(f"dG vanishes at {z}")
            kappa = data.Q.evaluate(z, args) / W
            out = np.empty(z.shape + (2, 2), dtype=complex)
            out[..., 0, 0] = kappa * Pz * Rz
            out[..., 0, 1] = -kappa * Pz * Pz
            out[..., 1, 0] = kappa * Rz * Rz
            out[..., 1, 1] = -kappa * Pz * Rz
            return out
        omega = np.asarray(data.omega.evaluate(z, args), dtype=complex)
        if self.kind == 'explicit':
            g = data.g_expr.evaluate(z, args)
        if g is None:
            raise SingularPoint("g is required at this point for transported secondary data")
        if inverted:
            return (omega / (np.asarray(g) ** 2))[..., None, None] * _nilpotent_inverted(g)
        return omega[..., None, None] * _nilpotent(g)

    def _apply(self, F, A):
        return A @ F if self.kind == 'dual' else F @ A

    # --- segments -------------------------------------------------------------------

    def _check_segment(self, a, b):
        if self.clearance <= 0:
            return
        for p in self.special:
            if segment_distance(a, b, p) < self.clearance:
                raise PathTooClose(f"Segment {a} -> {b} passes within {self.clearance:g} of {p}")

    def _max_step(self, norms, length):
        peak = float(np.max(norms)) * length
        if not np.isfinite(peak):
            raise SingularPoint("The coefficient matrix is not finite along the segment")
        if peak == 0:
            return np.inf
        return min(1.0, self.config['step_norm_bound'] / peak)

    def _solve(self, rhs, y0, max_step, t_span=(0.0, 1.0), events=None):
        sol = solve_ivp(rhs, t_span, y0, method=self.config['method'], rtol=self.config['rtol'],
                        atol=self.config['atol'], max_step=max_step, events=events)
        if sol.status == -1:
            raise StepSizeUnderflow(sol.message)
        return sol

    def _renormalize(self, F):
        if not self.config['det_renormalize']:
            return F
        d = F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0]
        logger.debug("det renormalisation, max drift %.2e", float(np.max(np.abs(d - 1))))
        return F / np.sqrt(d)[..., None, None]

    def transport_segments(self, starts, ends, frames, args, gs=None):
        """Batch transport along independent straight segments.

        Augmented secondary data carry g along each segment next to the frame, so gs must be given;
        returns (frames, args, gs) with gs None for the other kinds.
        """
        starts = np.asarray(starts, dtype=complex)
        ends = np.asarray(ends, dtype=complex)
        frames = np.asarray(frames, dtype=complex).reshape(-1, 2, 2)
        args = np.asarray(args, dtype=float).reshape(len(starts), len(self.points))
        n = len(starts)
        augmented = self.kind == 'augmented'
        if augmented and gs is None:
            raise SingularPoint("g is required at the segment starts for transported secondary data")
        if n == 0:
            return frames, args, (np.asarray(gs, dtype=complex) if augmented else None)
        for a, b in zip(starts, ends):
            self._check_segment(a, b)
        delta = ends - starts
        data = self.spec.data

        def rhs(t, y):
            z = starts + t * delta
            seg_args = self.segment_args(z, starts, args)
            F = y[:4 * n].reshape(n, 2, 2)
            A = self.coefficient(z, seg_args, g=y[4 * n:] if augmented else None)
            dF = (self._apply(F, A) * delta[:, None, None]).ravel()
            if not augmented:
                return dF
            return np.concatenate([dF, data.gprime.evaluate(z, seg_args) * delta])

        ts = np.linspace(0.0, 1.0, SAMPLES_PER_SEGMENT)
        samples = starts[None, :] + ts[:, None] * delta[None, :]
        if augmented:
            g_size = (1 + np.abs(np.asarray(gs, dtype=complex))) ** 2
            norms = [np.abs(data.omega.evaluate(zs, self.segment_args(zs, starts, args))) * g_size * np.abs(delta)
                     for zs in samples]
            y0 = np.concatenate([frames.ravel(), np.asarray(gs, dtype=complex)])
        else:
            norms = [np.linalg.norm(self.coefficient(zs, self.segment_args(zs, starts, args)), axis=(-2, -1))
                     * np.abs(delta) for zs in samples]
            y0 = frames.ravel()
        max_step = self._max_step(np.max(norms, axis=0), 1.0)
        sol = self._solve(rhs, y0, max_step)
        out = self._renormalize(sol.y[:4 * n, -1].reshape(n, 2, 2))
        new_args = np.stack([self.segment_args(ends, starts, args)[p] for p in self.points], axis=-1) \
            if self.points else np.zeros((n, 0))
        return out, new_args, (sol.y[4 * n:, -1] if augmented else None)

    def _augmented_segment(self, F, g, state, b):
        a = state.position
        delta = b - a
        args_a = np.asarray(state.args)
        switch = self.config['gauge_switch']
        gprime = self.spec.data.gprime
        t0 = 0.0
        inverted = abs(g) > switch
        u = 1.0 / g if inverted else g
        while True:
            def rhs(t, y, inverted=inverted):
                z = a + t * delta
                args = self.segment_args(z, a, args_a)
                F_now = y[:4].reshape(2, 2)
                A = self.coefficient(z, args, g=y[4], inverted=inverted)
                dg = gprime.evaluate(z, args)
                du = -y[4] ** 2 * dg if inverted else dg
                return np.concatenate([(F_now @ A).ravel(), [du]]) * delta

            def leave(t, y):
                return abs(y[4]) - switch

            leave.terminal = True
            leave.direction = 1
            zs = a + np.linspace(t0, 1.0, SAMPLES_PER_SEGMENT) * delta
            omega = np.abs(self.spec.data.omega.evaluate(zs, self.segment_args(zs, a, args_a)))
            weight = omega * (1 + switch) ** 2 * abs(delta)
            sol = self._solve(rhs, np.concatenate([F.ravel(), [u]]), self._max_step(weight, 1.0),
                              t_span=(t0, 1.0), events=leave)
            F = sol.y[:4, -1].reshape(2, 2)
            u = sol.y[4, -1]
            if sol.status == 1 and sol.t[-1] < 1.0:
                t0 = float(sol.t[-1])
                inverted = not inverted
                u = 1.0 / u
                logger.debug("gauge switch at z = %s (now inverted=%s)", a + t0 * delta, inverted)
                continue
            break
        g_end = (1.0 / u if u != 0 else complex(np.inf)) if inverted else u
        return self._renormalize(F), g_end

    def transport(self, path, F0, state=None, g0=None):
        path = [complex(z) for z in path]
        F = np.asarray(F0, dtype=complex)
        if state is None:
            state = BranchState.start(path[0], self.points)
        if self.kind == 'augmented' and g0 is None:
            g0 = self.spec.data.g_base
        g = g0
        for b in path[1:]:
            a = state.position
            if a == b:
                continue
            self._check_segment(a, b)
            if self.kind == 'augmented':
                F, g = self._augmented_segment(F, g, state, b)
            else:
                frames, _, _ = self.transport_segments([a], [b], F[None], np.asarray(state.args)[None])
                F = frames[0]
            state = state.advance(b)
        return LiftResult(F, state, g)

    def transport_tree(self, nodes, parents, levels, root_frame, root_state=None, root_g=None):
        """Frames (and g values) at every node of a tree, integrating parent -> child level by level."""
        nodes = np.asarray(nodes, dtype=complex)
        n = len(nodes)
        frames = np.zeros((n, 2, 2), dtype=complex)
        args = np.zeros((n, len(self.points)))
        gs = np.full(n, np.nan + 0j)
        root = levels[0][0]
        state = root_state if root_state is not None else BranchState.start(nodes[root], self.points)
        frames[root] = root_frame
        args[root] = state.args
        if self.kind == 'augmented':
            gs[root] = self.spec.data.g_base if root_g is None else root_g
        elif self.kind == 'explicit':
            gs[root] = self.spec.data.g_expr.evaluate(nodes[root], state.arg_map())
        for level in levels[1:]:
            level = np.asarray(level)
            if len(level) == 0:
                continue
            par = np.asarray(parents)[level]
            frames[level], args[level], moved = self.transport_segments(
                nodes[par], nodes[level], frames[par], args[par], gs[par] if self.kind == 'augmented' else None)
            if self.kind == 'augmented':
                gs[level] = moved
            elif self.kind == 'explicit':
                arg_map = {p: args[level, k] for k, p in enumerate(self.points)}
                gs[level] = self.spec.data.g_expr.evaluate(nodes[level], arg_map)
        return frames, args, gs


def coefficient_matrix(spec, z, state, g=None):
    return LiftIntegrator(spec).coefficient(complex(z), state.arg_map() if state else None, g=g)


def integrate_lift(spec, path, F0=None):
    F0 = spec.initial_frame if F0 is None else F0
    return LiftIntegrator(spec).transport(path, F0).frame


def refine_path(path, max_length):
    out = [complex(path[0])]
    for a, b in zip(path, path[1:]):
        pieces = max(1, int(np.ceil(abs(b - a) / max_length)))
        out.extend(a + (b - a) * np.arange(1, pieces + 1) / pieces)
    return out


def sample_lift(spec, path, F0=None, max_length=0.01):
    """Frames at the vertices of the refined polyline."""
    F0 = spec.initial_frame if F0 is None else F0
    integrator = LiftIntegrator(spec)
    points = refine_path(path, max_length)
    frames = [np.asarray(F0, dtype=complex)]
    result = LiftResult(frames[0], BranchState.start(points[0], integrator.points), None)
    g = spec.data.g_base if integrator.kind == 'augmented' else None
    for b in points[1:]:
        result = integrator.transport([result.state.position, b], result.frame, result.state, g)
        g = result.g
        frames.append(result.frame)
    return np.asarray(points), np.asarray(frames)
