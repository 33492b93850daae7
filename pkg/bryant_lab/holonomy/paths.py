import logging

import numpy as np

from bryant_lab.config.settings import loop_config
from bryant_lab.errors import LoopPlanningFailed
from bryant_lab.expressions.branch_expr import path_clearance, segment_distance
from bryant_lab.expressions.calculus import is_infinity

logger = logging.getLogger(__name__)


def circle(center, radius, start_angle, segments, clockwise=False):
    direction = -1.0 if clockwise else 1.0
    angles = start_angle + direction * 2 * np.pi * np.arange(segments + 1) / segments
    return list(center + radius * np.exp(1j * angles))


def _blocking(a, b, avoid, clearance):
    hits = [(segment_distance(a, b, p), p) for p in avoid if segment_distance(a, b, p) < clearance]
    return min(hits, key=lambda h: h[0])[1] if hits else None


def spoke(start, end, avoid, clearance, margin, attempts=None):
    """Polyline from start to end keeping `margin` away from every avoided point.

    A blocked segment is bent through a waypoint on the perpendicular bisector of the
    blocked point's foot.
    """
    attempts = loop_config['detour_attempts'] if attempts is None else attempts
    path = [start, end]
    for _ in range(attempts):
        for idx in range(len(path) - 1):
            a, b = path[idx], path[idx + 1]
            blocker = _blocking(a, b, avoid, margin)
            if blocker is not None:
                break
        else:
            return path
        d = b - a
        normal = 1j * d / abs(d)
        side = 1.0 if ((blocker - a) * np.conj(normal)).real <= 0 else -1.0
        waypoint = blocker + side * normal * 2 * margin
        path.insert(idx + 1, waypoint)
        logger.debug("detour around %s via %s", blocker, waypoint)
    for a, b in zip(path, path[1:]):
        if _blocking(a, b, avoid, clearance) is not None:
            raise LoopPlanningFailed(f"Could not route a path from {start} to {end}")
    return path


def loop_radius(center, others, base):
    distances = [abs(center - q) for q in others] + [abs(center - base)]
    return loop_config['radius_factor'] * min(distances)


def infinity_radius(points, base):
    size = max([abs(p) for p in points] + [abs(base), 1.0])
    return loop_config['infinity_radius_factor'] * size


def infinity_direction(punctures, base):
    """Middle of the largest angular gap between the finite punctures as seen from base."""
    finite = [p for p in punctures if not is_infinity(p)]
    if not finite:
        return 0.0
    angles = np.sort(np.mod(np.angle(np.asarray(finite) - base), 2 * np.pi))
    gaps = np.diff(np.concatenate([angles, [angles[0] + 2 * np.pi]]))
    k = int(np.argmax(gaps))
    return float(np.mod(angles[k] + gaps[k] / 2, 2 * np.pi))


def plan_loop(spec, index, base=None, radius=None):
    """Closed polyline from base around one puncture, positively oriented for that end."""
    base = spec.basepoint if base is None else complex(base)
    points = spec.special_points()
    clearance = path_clearance(points)
    segments = loop_config['circle_segments']
    target = spec.punctures[index]
    if is_infinity(target):
        R = radius if radius is not None else infinity_radius(points, base)
        theta = infinity_direction(spec.punctures, base)
        anchor = R * np.exp(1j * theta)
        margin = max(clearance, 0.25 * min([abs(p - q) for p in points for q in points if p != q] + [1.0]))
        outward = spoke(base, anchor, points, clearance, margin)
        ring = circle(0j, R, theta, segments, clockwise=True)
        return outward + ring[1:] + outward[::-1][1:]
    others = [p for p in points if abs(p - target) > 1e-12]
    r = radius if radius is not None else loop_radius(target, others, base)
    if r <= clearance:
        raise LoopPlanningFailed(f"No circle around {target} clears the other singular points")
    theta = float(np.angle(base - target))
    anchor = target + r * np.exp(1j * theta)
    margin = max(clearance, 0.5 * r)
    outward = spoke(base, anchor, others, clearance, margin)
    ring = circle(target, r, theta, segments)
    return outward + ring[1:] + outward[::-1][1:]


def relation_order(spec, base=None):
    """Puncture indices in the order whose loop product is trivial; infinity last."""
    base = spec.basepoint if base is None else complex(base)
    theta_inf = infinity_direction(spec.punctures, base)
    finite = [(i, p) for i, p in enumerate(spec.punctures) if not is_infinity(p)]
    finite.sort(key=lambda item: np.mod(np.angle(item[1] - base) - theta_inf, 2 * np.pi))
    order = [i for i, _ in finite]
    order += [i for i, p in enumerate(spec.punctures) if is_infinity(p)]
    return order


class SampleTree:
    """Nodes joined by straight edges to a parent, grouped into levels by depth for batched transport."""

    def __init__(self, root):
        self.nodes = [complex(root)]
        self.parents = [-1]
        self.depth = [0]

    def __len__(self):
        return len(self.nodes)

    def add(self, z, parent):
        self.nodes.append(complex(z))
        self.parents.append(parent)
        self.depth.append(self.depth[parent] + 1)
        return len(self.nodes) - 1

    def add_path(self, path, parent):
        """Chain the points of a polyline after `parent`, skipping a leading repeat of it."""
        index = parent
        for z in path:
            if complex(z) == self.nodes[index]:
                continue
            index = self.add(z, index)
        return index

    def add_chain(self, points, parent):
        indices = []
        for z in points:
            parent = self.add(z, parent)
            indices.append(parent)
        return indices

    def levels(self):
        depth = np.asarray(self.depth)
        return [list(np.flatnonzero(depth == k)) for k in range(int(depth.max()) + 1)]


def route(tree, target, avoid, clearance, margin):
    """Connect the tree root to target with a detouring polyline; returns the index of target."""
    path = spoke(tree.nodes[0], complex(target), avoid, clearance, margin)
    return tree.add_path(path[1:], 0)
