import logging
from dataclasses import dataclass, field

import numpy as np
import trimesh

from bryant_lab.config.settings import mesh_config
from bryant_lab.errors import PeriodOpen
from bryant_lab.expressions.branch_expr import path_clearance
from bryant_lab.expressions.calculus import is_infinity
from bryant_lab.holonomy.lift import LiftIntegrator
from bryant_lab.holonomy.monodromy import unitarizability_of, unitarized_frame
from bryant_lab.holonomy.paths import SampleTree, spoke

logger = logging.getLogger(__name__)

FORMATS = ('obj', 'ply')


@dataclass(frozen=True, eq=False)
class MeshGrid:
    """nu x nv chart nodes in z; `seam` marks a last column repeating the first after one turn."""
    chart: str
    nodes: np.ndarray
    seam: bool = False
    params: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.nodes.shape

    @classmethod
    def annulus(cls, center, r_in, r_out, nu, nv):
        """Log-polar annulus; the angle runs over [0, 2 pi] so the last column closes the seam."""
        if not 0 < r_in < r_out:
            raise ValueError(f"Annulus radii must satisfy 0 < r_in < r_out, got {r_in}, {r_out}")
        radii = np.geomspace(r_in, r_out, nu)
        angles = np.linspace(0.0, 2 * np.pi, nv)
        nodes = complex(center) + radii[:, None] * np.exp(1j * angles)[None, :]
        return cls('annulus', nodes, seam=nv > 2,
                   params={'center': complex(center), 'r_in': r_in, 'r_out': r_out})

    @classmethod
    def rectangle(cls, lower_left, upper_right, nu, nv):
        lower_left, upper_right = complex(lower_left), complex(upper_right)
        xs = np.linspace(lower_left.real, upper_right.real, nv)
        ys = np.linspace(lower_left.imag, upper_right.imag, nu)
        nodes = xs[None, :] + 1j * ys[:, None]
        return cls('rectangle', nodes, params={'lower_left': lower_left, 'upper_right': upper_right})

    @classmethod
    def for_end(cls, spec, index, res=None, config=mesh_config):
        """Annulus around one end, between fixed fractions of the distance to the other singular points."""
        nu, nv = res or config['default_res']
        end = spec.punctures[index]
        special = spec.special_points()
        scale = max([1.0] + [abs(p) for p in special])
        if is_infinity(end):
            return cls.annulus(0j, scale / config['end_outer_fraction'], scale / config['end_inner_fraction'], nu, nv)
        others = [p for p in special if abs(p - end) > 1e-12]
        nearest = min([abs(p - end) for p in others] + [scale])
        return cls.annulus(end, config['end_inner_fraction'] * nearest, config['end_outer_fraction'] * nearest,
                           nu, nv)

    @classmethod
    def central(cls, spec, res=None, config=mesh_config):
        nu, nv = res or config['default_res']
        scale = max([1.0] + [abs(p) for p in spec.special_points()])
        return cls.rectangle(complex(-scale, -scale), complex(scale, scale), nu, nv)

    def mask(self, special, config=mesh_config):
        """True at nodes kept away from every singular point."""
        keep = np.ones(self.shape, dtype=bool)
        special = list(special)
        if not special:
            return keep
        reach = max(path_clearance(special), config['end_inner_fraction'] * _spread(special))
        for p in special:
            keep &= np.abs(self.nodes - p) > reach
        return keep


def _spread(points):
    if len(points) < 2:
        return 1.0
    return min(abs(p - q) for i, p in enumerate(points) for q in points[i + 1:])


@dataclass(frozen=True, eq=False)
class SurfaceSample:
    points: np.ndarray
    mask: np.ndarray
    grid: MeshGrid
    period_closed: bool
    seam_defect: float = None
    max_edge_distance: float = None


def faces_for_grid(nu, nv, mask=None):
    """Two triangles per grid cell with all four corners kept; returns (faces, kept vertex indices)."""
    mask = np.ones((nu, nv), dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    kept = np.flatnonzero(mask.ravel())
    new_index = np.full(nu * nv, -1)
    new_index[kept] = np.arange(len(kept))
    faces = []
    for i in range(nu - 1):
        for j in range(nv - 1):
            a, b, c, d = i * nv + j, (i + 1) * nv + j, (i + 1) * nv + j + 1, i * nv + j + 1
            if mask[i, j] and mask[i + 1, j] and mask[i + 1, j + 1] and mask[i, j + 1]:
                faces.append((new_index[a], new_index[b], new_index[c]))
                faces.append((new_index[a], new_index[c], new_index[d]))
    return np.asarray(faces, dtype=int).reshape(-1, 3), kept


def _link(tree, parent, target, avoid, clearance):
    path = spoke(tree.nodes[parent], complex(target), avoid, clearance, 2 * clearance)
    return tree.add_path(path[1:], parent)


def _grid_tree(spec, grid, mask):
    """Tree from the basepoint down the first kept column, then along each row."""
    special = spec.special_points()
    clearance = path_clearance(special)
    tree = SampleTree(spec.basepoint)
    nu, nv = grid.shape
    index = np.full((nu, nv), -1)
    column_parent = 0
    for i in range(nu):
        kept = np.flatnonzero(mask[i])
        if not len(kept):
            continue
        head = kept[0]
        index[i, head] = _link(tree, column_parent, grid.nodes[i, head], special, clearance)
        column_parent = index[i, head]
        parent = index[i, head]
        for j in kept[1:]:
            index[i, j] = _link(tree, parent, grid.nodes[i, j], special, clearance)
            parent = index[i, j]
    return tree, index


def _ball(frames):
    H = frames @ np.conj(np.swapaxes(frames, -1, -2))
    x0 = ((H[..., 0, 0] + H[..., 1, 1]) / 2).real
    x3 = ((H[..., 0, 0] - H[..., 1, 1]) / 2).real
    coords = np.stack([H[..., 0, 1].real, H[..., 0, 1].imag, x3], axis=-1)
    return coords / (1 + x0)[..., None]


def _hyperbolic_distance(y1, y2):
    n1, n2 = np.sum(y1 * y1, axis=-1), np.sum(y2 * y2, axis=-1)
    gap = np.sum((y1 - y2) ** 2, axis=-1)
    return np.arccosh(1 + 2 * gap / ((1 - n1) * (1 - n2)))


def sample_surface(spec, grid, override=False, jobs=1):
    """f = F F* at the grid nodes in Poincare ball coordinates, integrating the lift along one spanning tree."""
    unitary, _ = unitarizability_of(spec, jobs=jobs)
    closed = unitary.conjugator is not None
    if not closed and not override:
        raise PeriodOpen(f"The period problem of {spec.name} is open (defect {unitary.defect:.3e})")
    if not closed:
        logger.warning("sampling a sheet of the universal cover of %s", spec.name)
    mask = grid.mask(spec.special_points())
    tree, index = _grid_tree(spec, grid, mask)
    integrator = LiftIntegrator(spec)
    frames, _, _ = integrator.transport_tree(tree.nodes, tree.parents, tree.levels(),
                                             unitarized_frame(spec, unitary.conjugator))
    points = np.zeros(grid.shape + (3,))
    points[mask] = _ball(frames[index[mask]])

    seam_defect = None
    if grid.seam and mask[:, 0].any():
        both = mask[:, 0] & mask[:, -1]
        if both.any():
            seam_defect = float(np.max(np.linalg.norm(points[both, 0] - points[both, -1], axis=-1)))
    edges = [_hyperbolic_distance(points[:, :-1][mask[:, :-1] & mask[:, 1:]],
                                  points[:, 1:][mask[:, :-1] & mask[:, 1:]]),
             _hyperbolic_distance(points[:-1][mask[:-1] & mask[1:]], points[1:][mask[:-1] & mask[1:]])]
    edges = np.concatenate(edges)
    logger.info("sampled %d nodes of %s on a %s chart", int(mask.sum()), spec.name, grid.chart)
    return SurfaceSample(points, mask, grid, closed, seam_defect,
                         float(edges.max()) if edges.size else None)


def export(points, faces, path, file_format=None):
    """OBJ (ASCII) or PLY (binary little endian) through trimesh."""
    file_format = (file_format or str(path).rsplit('.', 1)[-1]).lower()
    if file_format not in FORMATS:
        raise ValueError(f"Unsupported mesh format {file_format}. Choose one of {FORMATS}.")
    mesh = trimesh.Trimesh(vertices=np.asarray(points, dtype=float).reshape(-1, 3),
                           faces=np.asarray(faces, dtype=int).reshape(-1, 3), process=False)
    mesh.export(str(path), file_type=file_format)
    logger.info("wrote %d vertices and %d faces to %s", len(mesh.vertices), len(mesh.faces), path)
    return str(path)


def export_sample(sample, path, file_format=None):
    faces, kept = faces_for_grid(*sample.grid.shape, sample.mask)
    vertices = sample.points.reshape(-1, 3)[kept]
    return export(vertices, faces, path, file_format), len(vertices), len(faces)


def read_back(path):
    mesh = trimesh.load(str(path), process=False, force='mesh')
    return np.asarray(mesh.vertices), np.asarray(mesh.faces)
