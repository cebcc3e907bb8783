"""Chart graph derived from a labeling, plus validity and turning points.

Charts are maximal edge-connected same-label triangle sets.  Their
interfaces are assembled into boundary paths that terminate at corners
(vertices with >= 3 incident boundary edges) or close into cycles.  Each
path is oriented so the chart with the smaller id lies to its left; the
turning-point axis of a path is the cross product of its two chart
directions, which that orientation makes deterministic.
"""

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .labels import DIRECTIONS, axis_of, opposite

TURNING_UNARY_WIDTH = 0.9


class Chart:
    __slots__ = ("id", "label", "triangles", "neighbors")

    def __init__(self, cid, label, triangles, neighbors):
        self.id = cid
        self.label = int(label)
        self.triangles = triangles
        self.neighbors = neighbors

    @property
    def n_neighbors(self):
        return len(self.neighbors)


class Boundary:
    __slots__ = ("id", "left_chart", "right_chart", "vertices", "edges", "is_cycle")

    def __init__(self, bid, left_chart, right_chart, vertices, edges, is_cycle):
        self.id = bid
        self.left_chart = left_chart
        self.right_chart = right_chart
        self.vertices = vertices
        self.edges = edges
        self.is_cycle = is_cycle

    def chart_pair(self):
        return (self.left_chart, self.right_chart)


class ChartGraph:
    """Charts, oriented boundary paths, and corners of one labeling."""

    __slots__ = ("tri_chart", "charts", "boundaries", "corners", "corner_valency")

    def __init__(self, tri_chart, charts, boundaries, corners, corner_valency):
        self.tri_chart = tri_chart
        self.charts = charts
        self.boundaries = boundaries
        # corner vertex ids ascending; valency = incident boundary edges
        self.corners = corners
        self.corner_valency = corner_valency

    @property
    def n_charts(self):
        return len(self.charts)


def extract_charts(mesh, labeling):
    labels = labeling.labels
    t_count = mesh.n_triangles
    et = mesh.edge_tris
    same = labels[et[:, 0]] == labels[et[:, 1]]

    rows = et[same, 0]
    cols = et[same, 1]
    adj = csr_matrix(
        (np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(t_count, t_count)
    )
    n_charts, tri_chart = connected_components(adj, directed=False)
    tri_chart = tri_chart.astype(np.int64)

    order = np.argsort(tri_chart, kind="stable")
    split = np.searchsorted(tri_chart[order], np.arange(n_charts + 1))
    chart_tris = [order[split[c]:split[c + 1]] for c in range(n_charts)]
    chart_label = np.array([labels[tris[0]] for tris in chart_tris])

    cross = ~same
    cleft = tri_chart[et[cross, 0]]
    cright = tri_chart[et[cross, 1]]
    pair_lo = np.minimum(cleft, cright)
    pair_hi = np.maximum(cleft, cright)
    neighbors = [set() for _ in range(n_charts)]
    for a, b in zip(pair_lo, pair_hi):
        neighbors[a].add(int(b))
        neighbors[b].add(int(a))
    charts = [
        Chart(c, chart_label[c], chart_tris[c], sorted(neighbors[c]))
        for c in range(n_charts)
    ]

    boundary_edges = np.flatnonzero(cross)
    boundaries, corners, corner_valency = _assemble_boundaries(
        mesh, tri_chart, boundary_edges
    )
    return ChartGraph(tri_chart, charts, boundaries, corners, corner_valency)


def _assemble_boundaries(mesh, tri_chart, boundary_edges):
    edges = mesh.edges
    incident = {}
    for e in boundary_edges:
        u, v = edges[e]
        incident.setdefault(int(u), []).append(int(e))
        incident.setdefault(int(v), []).append(int(e))
    corner_set = {v for v, lst in incident.items() if len(lst) >= 3}
    edge_lookup = {}
    for e in boundary_edges:
        u, v = int(edges[e, 0]), int(edges[e, 1])
        edge_lookup[(u, v)] = int(e)
        edge_lookup[(v, u)] = int(e)

    visited = set()
    raw_paths = []

    def other_end(e, v):
        u, w = edges[e]
        return int(w) if int(u) == v else int(u)

    def walk(start, first_edge):
        verts = [start]
        path_edges = []
        cur, cur_e = start, first_edge
        while True:
            visited.add(cur_e)
            path_edges.append(cur_e)
            nxt = other_end(cur_e, cur)
            verts.append(nxt)
            if nxt in corner_set:
                return verts, path_edges, False
            cand = incident[nxt]
            cur_e = cand[0] if cand[0] != cur_e else cand[1]
            if cur_e in visited:
                # Closed into a cycle; the repeated tail vertex is dropped.
                return verts[:-1], path_edges, True
            cur = nxt

    for c in sorted(corner_set):
        for e in incident[c]:
            if e not in visited:
                raw_paths.append(walk(c, e))
    for e in sorted(int(e) for e in boundary_edges):
        if e not in visited:
            u = int(edges[e, 0])
            raw_paths.append(walk(u, e))

    boundaries = []
    for verts, path_edges, is_cycle in raw_paths:
        e0 = path_edges[0]
        stored = (int(edges[e0, 0]), int(edges[e0, 1]))
        left_tri, right_tri = mesh.edge_tris[e0]
        if stored == (verts[0], verts[1]):
            left, right = tri_chart[left_tri], tri_chart[right_tri]
        else:
            left, right = tri_chart[right_tri], tri_chart[left_tri]
        if left > right:
            if is_cycle:
                verts = [verts[0]] + verts[:0:-1]
            else:
                verts = verts[::-1]
            left, right = right, left
            pairs = zip(verts, verts[1:] + (verts[:1] if is_cycle else []))
            path_edges = [edge_lookup[p] for p in pairs]
        boundaries.append(
            Boundary(len(boundaries), int(left), int(right), verts, path_edges, is_cycle)
        )

    corners = np.array(sorted(corner_set), dtype=np.int64)
    corner_valency = np.array([len(incident[v]) for v in corners], dtype=np.int64)
    return boundaries, corners, corner_valency


def validity_proxy(graph):
    """Invalid corners + invalid boundaries + missing neighbors of small charts.

    Zero means pseudo-valid: no corner of valency >= 4, no boundary between
    opposite labels, and every chart has at least 4 neighbor charts.
    """
    score = int(np.sum(graph.corner_valency >= 4))
    for b in graph.boundaries:
        la = graph.charts[b.left_chart].label
        lb = graph.charts[b.right_chart].label
        if lb == opposite(la):
            score += 1
    for c in graph.charts:
        if c.n_neighbors < 4:
            score += 4 - c.n_neighbors
    return score


def invalid_sets(graph):
    """(corner vertices, boundary ids, chart ids) failing the validity rules."""
    bad_corners = [
        int(v) for v, k in zip(graph.corners, graph.corner_valency) if k >= 4
    ]
    bad_boundaries = [
        b.id
        for b in graph.boundaries
        if graph.charts[b.right_chart].label == opposite(graph.charts[b.left_chart].label)
    ]
    bad_charts = [c.id for c in graph.charts if c.n_neighbors < 4]
    return bad_corners, bad_boundaries, bad_charts


class TurningPointSet:
    """Turning points per boundary: indices into the boundary's vertex path."""

    __slots__ = ("per_boundary",)

    def __init__(self, per_boundary):
        self.per_boundary = per_boundary

    def vertices(self, graph):
        """Flat list of (boundary id, vertex id) pairs."""
        out = []
        for bid, idxs in enumerate(self.per_boundary):
            verts = graph.boundaries[bid].vertices
            out.extend((bid, verts[i]) for i in idxs)
        return out

    @property
    def count(self):
        return sum(len(ix) for ix in self.per_boundary)


def boundary_axis(graph, boundary):
    """Signed travel axis of a boundary, or None when its labels share an axis."""
    la = graph.charts[boundary.left_chart].label
    lb = graph.charts[boundary.right_chart].label
    if axis_of(la) == axis_of(lb):
        return None
    return np.cross(DIRECTIONS[la], DIRECTIONS[lb])


def turning_costs(points, axis, cyclic):
    """Unary/binary cost arrays of the two-label boundary partition."""
    points = np.asarray(points, dtype=np.float64)
    if cyclic:
        vecs = np.roll(points, -1, axis=0) - points
    else:
        vecs = points[1:] - points[:-1]
    vecs = vecs / np.linalg.norm(vecs, axis=1)[:, None]
    dots = vecs @ axis
    penalty = 1.0 - np.exp(-0.5 * (dots / TURNING_UNARY_WIDTH) ** 2)
    unary = np.zeros((len(vecs), 2))
    unary[dots < 0.0, 0] = penalty[dots < 0.0]
    unary[dots > 0.0, 1] = penalty[dots > 0.0]
    if cyclic:
        consec = np.einsum("ij,ij->i", vecs, np.roll(vecs, -1, axis=0))
    else:
        consec = np.einsum("ij,ij->i", vecs[:-1], vecs[1:])
    switch_cost = np.exp(-((consec - 1.0) ** 2) / 2.0)
    return unary, switch_cost


def chain_energy(unary, switch_cost, labels, cyclic):
    """Canonical energy of a two-label assignment on an edge chain/cycle."""
    total = 0.0
    n = len(labels)
    for i in range(n):
        total += unary[i, labels[i]]
    for i in range(n - 1):
        if labels[i] != labels[i + 1]:
            total += switch_cost[i]
    if cyclic and n > 1 and labels[-1] != labels[0]:
        total += switch_cost[n - 1]
    return total


def solve_chain(unary, switch_cost, cyclic):
    """Exact minimum-energy two-label assignment by dynamic programming.

    Ties prefer label 0 (cycles additionally prefer first-label 0).
    """
    n = len(unary)
    if n == 1:
        lab = 0 if unary[0, 0] <= unary[0, 1] else 1
        return [lab]
    if not cyclic:
        return _dp_open(unary, switch_cost, None)[1]
    best = None
    for first in (0, 1):
        energy, labels = _dp_open(
            unary, switch_cost[:-1], first, close_cost=switch_cost[-1]
        )
        if best is None or energy < best[0]:
            best = (energy, labels)
    return best[1]


def _dp_open(unary, switch_cost, first_label, close_cost=None):
    n = len(unary)
    dp = np.empty((n, 2))
    back = np.empty((n, 2), dtype=np.int8)
    dp[0] = unary[0]
    if first_label is not None:
        dp[0, 1 - first_label] = np.inf
    for i in range(1, n):
        for lab in (0, 1):
            c0 = dp[i - 1, 0] + (switch_cost[i - 1] if lab != 0 else 0.0)
            c1 = dp[i - 1, 1] + (switch_cost[i - 1] if lab != 1 else 0.0)
            if c0 <= c1:
                dp[i, lab] = c0
                back[i, lab] = 0
            else:
                dp[i, lab] = c1
                back[i, lab] = 1
        dp[i] += unary[i]
    end_costs = dp[n - 1].copy()
    if close_cost is not None:
        for lab in (0, 1):
            if lab != first_label:
                end_costs[lab] += close_cost
    last = 0 if end_costs[0] <= end_costs[1] else 1
    energy = end_costs[last]
    labels = [0] * n
    labels[n - 1] = last
    for i in range(n - 1, 0, -1):
        labels[i - 1] = int(back[i, labels[i]])
    return energy, labels


def detect_turning_points(mesh, graph):
    """Vertices where a boundary's travel direction along its axis reverses.

    Boundaries whose two charts share a label axis are skipped: the axis
    construction is undefined there and the labeling is already penalized.
    """
    per_boundary = []
    for b in graph.boundaries:
        axis = boundary_axis(graph, b)
        n_edges = len(b.edges)
        if axis is None or n_edges < 2:
            per_boundary.append([])
            continue
        pts = mesh.vertices[b.vertices]
        unary, switch_cost = turning_costs(pts, axis, b.is_cycle)
        labels = solve_chain(unary, switch_cost, b.is_cycle)
        idxs = [i + 1 for i in range(n_edges - 1) if labels[i] != labels[i + 1]]
        if b.is_cycle and labels[-1] != labels[0]:
            idxs.append(0)
        per_boundary.append(sorted(idxs))
    return TurningPointSet(per_boundary)
