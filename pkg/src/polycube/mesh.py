"""Immutable triangle surface meshes and tetrahedral meshes.

A SurfaceMesh is built once from vertices and triangles and precomputes
everything the labeling pipeline queries: per-triangle normals/areas,
edge lists with winding-consistent orientation, triangle and vertex
adjacency, and the reference tangent frames used by the distortion
evaluator.  All arrays are read-only so a mesh can be shared freely
across worker threads.
"""

import numpy as np

from .errors import DegenerateError, OrientationError, TopologyError

_AREA_EPS = 1e-14


class SurfaceMesh:
    """Closed, edge-manifold, consistently oriented triangle mesh."""

    def __init__(self, vertices, triangles):
        vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise TopologyError("vertices must be an (n, 3) array")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise TopologyError("triangles must be an (m, 3) array")
        if triangles.size and (triangles.min() < 0 or triangles.max() >= len(vertices)):
            raise TopologyError("triangle index out of range")

        self.vertices = vertices
        self.triangles = triangles
        self._compute_geometry()
        if self._signed_volume() < 0.0:
            # Consistently inward-facing input: flip every triangle once.
            self.triangles = np.ascontiguousarray(self.triangles[:, ::-1])
            self._compute_geometry()
        self._build_edges()
        self._build_vertex_adjacency()
        self._build_frames()
        for arr in (
            self.vertices, self.triangles, self.normals, self.areas,
            self.centroids, self.edges, self.edge_tris, self.tri_edges,
            self.tri_neighbors, self.frame_u, self.frame_v, self.shape_inv,
        ):
            arr.setflags(write=False)

    # -- construction ------------------------------------------------------

    def _compute_geometry(self):
        p = self.vertices[self.triangles]
        cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        norms = np.linalg.norm(cross, axis=1)
        if np.any(norms <= _AREA_EPS):
            bad = int(np.argmax(norms <= _AREA_EPS))
            raise DegenerateError(f"triangle {bad} has zero area")
        self.normals = cross / norms[:, None]
        self.areas = 0.5 * norms
        self.centroids = p.mean(axis=1)
        self.total_area = float(self.areas.sum())

    def _signed_volume(self):
        return float(np.einsum("ij,ij,i->", self.centroids, self.normals, self.areas) / 3.0)

    def _build_edges(self):
        tris = self.triangles
        t_count = len(tris)
        # Directed half-edges in winding order; a closed consistently
        # oriented surface pairs every (u, v) with exactly one (v, u).
        src = tris[:, [0, 1, 2]].ravel()
        dst = tris[:, [1, 2, 0]].ravel()
        tri_of = np.repeat(np.arange(t_count), 3)

        v_count = len(self.vertices)
        key = np.minimum(src, dst) * v_count + np.maximum(src, dst)
        order = np.argsort(key, kind="stable")
        key_sorted = key[order]
        uniq, start, counts = np.unique(key_sorted, return_index=True, return_counts=True)
        if np.any(counts != 2):
            bad = counts != 2
            n_open = int(np.sum(counts[bad] == 1))
            if n_open:
                raise TopologyError(f"open surface: {n_open} boundary edge(s)")
            raise TopologyError("non-manifold edge shared by more than 2 triangles")

        first = order[start]
        second = order[start + 1]
        if np.any(src[first] != dst[second]) or np.any(dst[first] != src[second]):
            raise TopologyError("inconsistent triangle orientation across an edge")

        # Edge k is stored directed as (src, dst) of its first half-edge;
        # edge_tris[k] = (triangle left of that direction, triangle right).
        self.edges = np.column_stack([src[first], dst[first]]).astype(np.int64)
        self.edge_tris = np.column_stack([tri_of[first], tri_of[second]]).astype(np.int64)

        edge_of_halfedge = np.empty(3 * t_count, dtype=np.int64)
        edge_ids = np.arange(len(uniq))
        edge_of_halfedge[first] = edge_ids
        edge_of_halfedge[second] = edge_ids
        self.tri_edges = edge_of_halfedge.reshape(t_count, 3)

        neighbor = np.empty(3 * t_count, dtype=np.int64)
        neighbor[first] = tri_of[second]
        neighbor[second] = tri_of[first]
        self.tri_neighbors = neighbor.reshape(t_count, 3)

        lengths = np.linalg.norm(
            self.vertices[self.edges[:, 0]] - self.vertices[self.edges[:, 1]], axis=1
        )
        self.l_avg = float(lengths.mean())

    def _build_vertex_adjacency(self):
        v_count = len(self.vertices)
        e = self.edges
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        order = np.lexsort((dst, src))
        self._vv_indices = dst[order]
        self._vv_indptr = np.zeros(v_count + 1, dtype=np.int64)
        np.add.at(self._vv_indptr, src + 1, 1)
        np.cumsum(self._vv_indptr, out=self._vv_indptr)

        tri_flat = self.triangles.ravel()
        tri_of = np.repeat(np.arange(len(self.triangles)), 3)
        order = np.lexsort((tri_of, tri_flat))
        self._vt_indices = tri_of[order]
        self._vt_indptr = np.zeros(v_count + 1, dtype=np.int64)
        np.add.at(self._vt_indptr, tri_flat + 1, 1)
        np.cumsum(self._vt_indptr, out=self._vt_indptr)

    def _build_frames(self):
        # Right-handed orthonormal tangent frame per triangle (u, v, normal)
        # and the inverse of the 2D edge matrix [[e1.u, e2.u], [0, e2.v]].
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        u = e1 / np.linalg.norm(e1, axis=1)[:, None]
        v = np.cross(self.normals, u)
        a = np.einsum("ij,ij->i", e1, u)
        b = np.einsum("ij,ij->i", e2, u)
        c = np.einsum("ij,ij->i", e2, v)
        inv = np.zeros((len(a), 2, 2))
        inv[:, 0, 0] = 1.0 / a
        inv[:, 0, 1] = -b / (a * c)
        inv[:, 1, 1] = 1.0 / c
        self.frame_u = u
        self.frame_v = v
        self.shape_inv = inv

    # -- queries -----------------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def avg_area(self):
        return self.total_area / len(self.triangles)

    @property
    def bbox_diagonal(self):
        return float(np.linalg.norm(self.vertices.max(axis=0) - self.vertices.min(axis=0)))

    def vertex_neighbors(self, v):
        """Vertex ids adjacent to v, ascending."""
        return self._vv_indices[self._vv_indptr[v]:self._vv_indptr[v + 1]]

    def vertex_triangles(self, v):
        """Triangle ids incident to v, ascending."""
        return self._vt_indices[self._vt_indptr[v]:self._vt_indptr[v + 1]]


class TetMesh:
    """Tetrahedral mesh with positively oriented cells."""

    def __init__(self, vertices, tets):
        vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        tets = np.ascontiguousarray(tets, dtype=np.int64)
        if tets.ndim != 2 or tets.shape[1] != 4:
            raise OrientationError("tets must be an (n, 4) array")
        p = vertices[tets]
        vol6 = np.linalg.det(np.stack(
            [p[:, 1] - p[:, 0], p[:, 2] - p[:, 0], p[:, 3] - p[:, 0]], axis=1
        ))
        if np.any(np.abs(vol6) <= _AREA_EPS):
            bad = int(np.argmax(np.abs(vol6) <= _AREA_EPS))
            raise OrientationError(f"tet {bad} has zero volume")
        flip = vol6 < 0
        tets = tets.copy()
        tets[flip] = tets[flip][:, [0, 1, 3, 2]]
        self.vertices = vertices
        self.tets = tets
        self.vertices.setflags(write=False)
        self.tets.setflags(write=False)

    @property
    def n_tets(self):
        return len(self.tets)


# Local vertex triples of the outward-facing tet faces (positive cells).
_TET_FACES = np.array([[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]])


def extract_boundary(tet_mesh):
    """Surface mesh of the tet faces incident to exactly one cell."""
    faces = tet_mesh.tets[:, _TET_FACES].reshape(-1, 3)
    key = np.sort(faces, axis=1)
    _, inverse, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    boundary = faces[counts[inverse] == 1]
    if len(boundary) == 0:
        raise TopologyError("tet mesh has no boundary faces")
    used = np.unique(boundary)
    remap = np.full(len(tet_mesh.vertices), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    return SurfaceMesh(tet_mesh.vertices[used], remap[boundary])
