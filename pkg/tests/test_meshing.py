import numpy as np
import pytest

from bryant_lab.catalog import families
from bryant_lab.catalog.registry import build_family
from bryant_lab.errors import PeriodOpen
from bryant_lab.linalg.sl2c import herm_point, to_ball
from bryant_lab.meshing.mesh import MeshGrid, export, export_sample, faces_for_grid, read_back, sample_surface


def _distances(points):
    norms = np.sum(points * points, axis=-1)
    gap = np.sum((points[:, None] - points[None, :]) ** 2, axis=-1)
    return np.arccosh(1 + 2 * gap / np.outer(1 - norms, 1 - norms))


@pytest.fixture(scope="module")
def horosphere_sample():
    grid = MeshGrid.rectangle(-1 - 1j, 1 + 1j, 4, 4)
    return sample_surface(families.make_horosphere(1.0), grid)


def test_faces_for_a_single_cell():
    faces, kept = faces_for_grid(2, 2)
    assert faces.shape == (2, 3)
    assert list(kept) == [0, 1, 2, 3]


def test_masked_node_removes_its_cells():
    mask = np.ones((3, 3), dtype=bool)
    mask[1, 1] = False
    faces, kept = faces_for_grid(3, 3, mask)
    assert faces.shape == (0, 3)
    assert len(kept) == 8


def test_annulus_needs_ordered_radii():
    with pytest.raises(ValueError, match="Annulus radii"):
        MeshGrid.annulus(0j, 1.0, 0.5, 4, 8)


def test_grid_mask_avoids_the_ends(catenoid):
    grid = MeshGrid.central(catenoid, res=(5, 5))
    mask = grid.mask(catenoid.special_points())
    assert not mask[2, 2]
    assert mask[0, 0]


def test_horosphere_sample_is_an_isometric_copy(horosphere_sample):
    sample = horosphere_sample
    assert sample.period_closed
    assert sample.mask.all()
    points = sample.points.reshape(-1, 3)
    assert np.all(np.linalg.norm(points, axis=-1) < 1)
    closed = families.horosphere_lift(1.0)
    expected = np.array([to_ball(herm_point(closed(z))) for z in sample.grid.nodes.ravel()])
    assert np.allclose(_distances(points), _distances(expected), atol=1e-8)


@pytest.mark.parametrize("suffix", ["obj", "ply"])
def test_export_and_read_back(horosphere_sample, tmp_path, suffix):
    path, vertices, faces = export_sample(horosphere_sample, tmp_path / f"horosphere.{suffix}")
    assert (vertices, faces) == (16, 18)
    points, triangles = read_back(path)
    assert np.allclose(points, horosphere_sample.points.reshape(-1, 3), atol=1e-6)
    assert triangles.shape == (18, 3)


def test_unsupported_mesh_format(tmp_path):
    with pytest.raises(ValueError, match="Unsupported mesh format"):
        export(np.zeros((3, 3)), [[0, 1, 2]], tmp_path / "mesh.stl")


def test_open_period_problem_needs_override():
    spec = build_family('fournoid', {'p': 1.9})
    with pytest.raises(PeriodOpen):
        sample_surface(spec, MeshGrid.central(spec, res=(3, 3)))
