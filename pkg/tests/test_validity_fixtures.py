"""Hand-built invalidity fixtures with analytically known proxy values,
plus the two documented limitation cases (the proxy is neither necessary
nor sufficient for a matching orthogonal polyhedron to exist; realizability
itself is not machine-checked here)."""

import numpy as np
import pytest

from polycube import procedural
from polycube.charts import extract_charts, invalid_sets, validity_proxy
from polycube.labeling import Labeling, naive_normal_labeling


@pytest.fixture(scope="module")
def cube4():
    return procedural.cube(subdiv=4)


def _paint_cells(lab, cells, keys, label, gen=1):
    tris = [t for k in keys for t in cells[k]]
    return lab.with_labels(np.array(tris), label, gen)


def test_small_chart_island(cube4, face_cells_fn):
    """Island chart with one neighbor: contributes 4 - 1 = 3."""
    lab = naive_normal_labeling(cube4)
    cells = face_cells_fn(cube4, 2, +1, 4)  # top face
    lab = _paint_cells(lab, cells, [(1, 1), (2, 1), (1, 2), (2, 2)], 0)
    g = extract_charts(cube4, lab)
    corners, boundaries, charts = invalid_sets(g)
    assert (len(corners), len(boundaries), len(charts)) == (0, 0, 1)
    assert validity_proxy(g) == 3


def test_opposite_boundary_island(cube4, face_cells_fn):
    """-Z island inside the +Z top: one invalid boundary + a 1-neighbor chart."""
    lab = naive_normal_labeling(cube4)
    cells = face_cells_fn(cube4, 2, +1, 4)
    lab = _paint_cells(lab, cells, [(1, 1), (2, 1), (1, 2), (2, 2)], 5)
    g = extract_charts(cube4, lab)
    corners, boundaries, charts = invalid_sets(g)
    assert (len(corners), len(boundaries), len(charts)) == (0, 1, 1)
    assert validity_proxy(g) == 1 + 3


def test_high_valency_corner_pinwheel(cube4, face_cells_fn):
    """Four single-cell charts meeting at one vertex: valency 4 plus four
    3-neighbor charts -> 1 + 4."""
    lab = naive_normal_labeling(cube4)
    cells = face_cells_fn(cube4, 0, +1, 4)  # +X face; in-plane axes (y, z)
    lab = _paint_cells(lab, cells, [(1, 1)], 2)
    lab = _paint_cells(lab, cells, [(2, 1)], 4)
    lab = _paint_cells(lab, cells, [(2, 2)], 3)
    lab = _paint_cells(lab, cells, [(1, 2)], 5)
    g = extract_charts(cube4, lab)
    corners, boundaries, charts = invalid_sets(g)
    assert len(corners) == 1
    assert len(boundaries) == 0
    assert sorted(g.charts[c].n_neighbors for c in charts) == [3, 3, 3, 3]
    assert validity_proxy(g) == 1 + 4
    # the flagged vertex is the common corner of the four painted cells
    v = corners[0]
    assert np.allclose(cube4.vertices[v], [1.0, 0.5, 0.5])


def test_proxy_not_necessary_fixture():
    """Corner tripod of voxels: literally an axis-aligned polycube (the
    naive labeling is realizable by the identity map), yet the inner
    vertex has valency 4, so the proxy is positive."""
    mesh = procedural.voxel_surface([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)])
    lab = naive_normal_labeling(mesh)
    g = extract_charts(mesh, lab)
    corners, boundaries, charts = invalid_sets(g)
    assert len(corners) >= 1
    inner = [v for v in corners if np.allclose(mesh.vertices[v], [1, 1, 1])]
    assert len(inner) == 1
    assert validity_proxy(g) > 0


def test_proxy_not_sufficient_pinwheel_fixture(face_cells_fn):
    """Inset pinwheel of +-X/+-Y charts on the top face: pseudo-valid
    (proxy 0) although the cyclic ordering of the four rectangles admits
    no matching orthogonal polyhedron."""
    n = 6
    mesh = procedural.cube(subdiv=n)
    lab = naive_normal_labeling(mesh)
    cells = face_cells_fn(mesh, 2, +1, n)
    arm_a = [(1, 4), (2, 4), (3, 4)]  # north arm
    arm_b = [(4, 2), (4, 3), (4, 4)]  # east arm
    arm_c = [(2, 1), (3, 1), (4, 1)]  # south arm
    arm_d = [(1, 1), (1, 2), (1, 3)]  # west arm
    lab = _paint_cells(lab, cells, arm_a, 0)   # +X
    lab = _paint_cells(lab, cells, arm_b, 2)   # +Y
    lab = _paint_cells(lab, cells, arm_c, 1)   # -X
    lab = _paint_cells(lab, cells, arm_d, 3)   # -Y
    g = extract_charts(mesh, lab)
    assert validity_proxy(g) == 0
    assert g.n_charts == 6 + 5  # ring + 4 arms + center on top of the cube's six
