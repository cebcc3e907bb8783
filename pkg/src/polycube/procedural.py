"""Procedurally generated test shapes.

These cover the geometry families the optimizer is exercised on without
needing input files: axis-aligned boxes (optionally subdivided), voxel
solids such as an L-shaped block, icospheres, swept U-shaped tubes, and
thin rotated wedges.
"""

import numpy as np

from .mesh import SurfaceMesh

_DIRS = np.array(
    [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]]
)


def voxel_surface(cells, subdiv=1, scale=1.0, origin=(0.0, 0.0, 0.0)):
    """Boundary surface of a union of unit voxels, each face an n x n grid.

    cells: iterable of integer (i, j, k) triples. Vertices are welded
    exactly by building on the integer lattice of step 1/subdiv.
    """
    cells = {tuple(int(c) for c in cell) for cell in cells}
    if not cells:
        raise ValueError("no cells")
    verts = {}
    tris = []

    def vid(p):
        if p not in verts:
            verts[p] = len(verts)
        return verts[p]

    for cell in sorted(cells):
        base = np.array(cell) * subdiv
        for d in range(6):
            if tuple(np.array(cell) + _DIRS[d]) in cells:
                continue
            axis, sign = d // 2, 1 - 2 * (d % 2)
            u_ax, w_ax = (axis + 1) % 3, (axis + 2) % 3
            if sign < 0:
                u_ax, w_ax = w_ax, u_ax
            off = subdiv if sign > 0 else 0
            for a in range(subdiv):
                for b in range(subdiv):
                    corner = base.copy()
                    corner[axis] += off
                    q = []
                    for da, db in ((0, 0), (1, 0), (1, 1), (0, 1)):
                        p = corner.copy()
                        p[u_ax] += a + da
                        p[w_ax] += b + db
                        q.append(vid(tuple(p)))
                    tris.append([q[0], q[1], q[2]])
                    tris.append([q[0], q[2], q[3]])
    points = np.array(list(verts.keys()), dtype=np.float64) * (scale / subdiv)
    points += np.asarray(origin)
    return SurfaceMesh(points, np.array(tris))


def cube(size=1.0, subdiv=1):
    """Axis-aligned cube with each face split into subdiv^2 quads."""
    return voxel_surface([(0, 0, 0)], subdiv=subdiv, scale=size)


def l_block(subdiv=1, scale=1.0):
    """L-shaped block: three unit voxels in an L footprint, height 1."""
    return voxel_surface([(0, 0, 0), (1, 0, 0), (0, 1, 0)], subdiv=subdiv, scale=scale)


def rotate_mesh(mesh, axis, degrees):
    """New mesh with vertices rotated about a base axis through the origin."""
    t = np.radians(degrees)
    c, s = np.cos(t), np.sin(t)
    rot = np.eye(3)
    i, j = [(1, 2), (2, 0), (0, 1)][axis]
    rot[i, i] = rot[j, j] = c
    rot[i, j], rot[j, i] = -s, s
    return SurfaceMesh(mesh.vertices @ rot.T, mesh.triangles)


def icosphere(subdivisions=3, radius=1.0):
    """Unit icosahedron refined by midpoint subdivision; 20 * 4^n triangles."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=np.float64,
    )
    faces = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ]
    )
    verts = list(verts / np.linalg.norm(verts[0]))
    for _ in range(subdivisions):
        midpoint = {}
        new_faces = []

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in midpoint:
                p = verts[i] + verts[j]
                verts.append(p / np.linalg.norm(p))
                midpoint[key] = len(verts) - 1
            return midpoint[key]

        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = np.array(new_faces)
    return SurfaceMesh(np.array(verts) * radius, faces)


def u_cylinder(sides=16, leg_segments=6, arc_segments=10, tube_radius=0.35,
               bend_radius=1.0, leg_height=1.5):
    """Closed U-shaped tube: two vertical legs joined by a half-circle bend."""
    path = []
    for i in range(leg_segments + 1):
        z = leg_height * (1.0 - i / leg_segments)
        path.append(np.array([-bend_radius, 0.0, z]))
    for i in range(1, arc_segments + 1):
        t = np.pi * i / arc_segments
        path.append(np.array([-bend_radius * np.cos(t), 0.0, -bend_radius * np.sin(t)]))
    for i in range(1, leg_segments + 1):
        z = leg_height * i / leg_segments
        path.append(np.array([bend_radius, 0.0, z]))
    path = np.array(path)

    tangents = np.gradient(path, axis=0)
    tangents /= np.linalg.norm(tangents, axis=1)[:, None]
    b1 = np.array([0.0, 1.0, 0.0])
    verts = []
    for p, t in zip(path, tangents):
        b2 = np.cross(t, b1)
        b2 /= np.linalg.norm(b2)
        for k in range(sides):
            a = 2.0 * np.pi * k / sides
            verts.append(p + tube_radius * (np.cos(a) * b1 + np.sin(a) * b2))
    tris = []
    n_rings = len(path)
    for r in range(n_rings - 1):
        for k in range(sides):
            a = r * sides + k
            b = r * sides + (k + 1) % sides
            c = (r + 1) * sides + (k + 1) % sides
            d = (r + 1) * sides + k
            tris += [[a, b, c], [a, c, d]]
    # End caps: a center vertex fanned to the first and last rings.
    verts.append(path[0])
    verts.append(path[-1])
    c0, c1 = len(verts) - 2, len(verts) - 1
    for k in range(sides):
        tris.append([c0, (k + 1) % sides, k])
        base = (n_rings - 1) * sides
        tris.append([c1, base + k, base + (k + 1) % sides])
    return SurfaceMesh(np.array(verts), np.array(tris))


def thin_wedge(length=4.0, width=2.0, height=0.25, rotate_deg=45.0, subdiv=4):
    """Thin slab rotated about Z; its long faces sit 45 degrees off-axis."""
    mesh = voxel_surface(
        [(i, j, 0) for i in range(subdiv * 2) for j in range(subdiv)],
        subdiv=1,
        scale=1.0,
    )
    scale = np.array([length / (subdiv * 2), width / subdiv, height])
    squashed = SurfaceMesh(mesh.vertices * scale, mesh.triangles)
    return rotate_mesh(squashed, 2, rotate_deg)
