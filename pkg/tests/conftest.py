import numpy as np
import pytest

from polycube import procedural


@pytest.fixture(scope="session")
def cube():
    return procedural.cube()


@pytest.fixture(scope="session")
def cube4():
    return procedural.cube(subdiv=4)


@pytest.fixture(scope="session")
def rotated_cube3():
    """Cube with 3x3 faces rotated 10 degrees about Z."""
    return procedural.rotate_mesh(procedural.cube(subdiv=3), 2, 10.0)


@pytest.fixture(scope="session")
def icosphere_small():
    return procedural.icosphere(2)


@pytest.fixture(scope="session")
def icosphere():
    return procedural.icosphere(3)


@pytest.fixture(scope="session")
def l_block():
    return procedural.l_block()


def face_cells(mesh, axis, sign, subdiv):
    """Map (i, j) grid cell of a subdivided cube face to its triangle ids.

    Cells are indexed by the two in-plane axes in ascending axis order,
    using centroid coordinates; the cube spans [0, 1]^3.
    """
    tol = 1e-9
    face_coord = 1.0 if sign > 0 else 0.0
    on_face = np.abs(mesh.centroids[:, axis] - face_coord) < 1e-6
    in_plane = [a for a in range(3) if a != axis]
    cells = {}
    for t in np.flatnonzero(on_face):
        c = mesh.centroids[t]
        i = int(c[in_plane[0]] * subdiv - tol)
        j = int(c[in_plane[1]] * subdiv - tol)
        cells.setdefault((i, j), []).append(int(t))
    return cells


@pytest.fixture(scope="session")
def face_cells_fn():
    return face_cells
