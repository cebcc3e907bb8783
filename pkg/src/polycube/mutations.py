"""Labeling mutations and deterministic repairs.

Mutations (directional path, chart removal, chart propagation) produce new
candidate labelings from random locations; the genetic loop arbitrates.
Repairs fix identifiable invalidities deterministically and run only on
initial and final solutions; boundary smoothing lives in `labeling` and
runs before every evaluation.
"""

import heapq
import warnings

import numpy as np

from .charts import extract_charts, invalid_sets
from .errors import NoPathError, SkipWarning
from .fitness import FitnessWeights, evaluate_fitness
from .graphcut import MultiLabelProblem, coplanarity_weights, potts_penalty, solve_alpha_expansion
from .labeling import smooth_boundaries  # noqa: F401  (re-exported: part of the repair set)
from .labels import DIRECTIONS, N_LABELS, axis_of, opposite

# Band widths are sampled from [1, 5] average edge lengths.
WIDTH_RANGE = (1.0, 5.0)
REPAIR_SIZES = (1, 2, 3)
MAX_REPAIR_ROUNDS = 20


def triangle_band(mesh, seeds, width, allowed=None, seed_dists=None):
    """Triangles within centroid-walk distance `width` of the seed set.

    Breadth-first over triangle adjacency accumulating centroid-to-centroid
    distances: a cheap geodesic approximation, adequate for bands a few
    edge lengths wide.  `allowed` restricts the traversal.
    """
    dist = np.full(mesh.n_triangles, np.inf)
    heap = []
    for i, t in enumerate(seeds):
        d0 = 0.0 if seed_dists is None else float(seed_dists[i])
        if d0 <= width and d0 < dist[t]:
            dist[t] = d0
            heapq.heappush(heap, (d0, int(t)))
    centroids = mesh.centroids
    while heap:
        d, t = heapq.heappop(heap)
        if d > dist[t]:
            continue
        for nb in mesh.tri_neighbors[t]:
            if allowed is not None and not allowed[nb]:
                continue
            nd = d + float(np.linalg.norm(centroids[nb] - centroids[t]))
            if nd <= width and nd < dist[nb]:
                dist[nb] = nd
                heapq.heappush(heap, (nd, int(nb)))
    return np.flatnonzero(dist <= width)


def _boundary_vertex_set(graph):
    verts = set()
    for b in graph.boundaries:
        verts.update(b.vertices)
    return verts


def directional_path(mesh, labeling, graph, chart_id, start_vertex, direction,
                     width, gen):
    """Split a chart along a greedy walk from a boundary vertex.

    Starting at `start_vertex`, repeatedly steps to the adjacent chart
    vertex maximizing step . direction until another boundary is reached
    (or a step cap).  Chart triangles within `width` of the walk take one
    of the two labels not parallel to the chart axis or the walk axis,
    whichever aligns best with the band's area-weighted normals.  Raises
    NoPathError when the walk cannot leave the start vertex.
    """
    chart = graph.charts[chart_id]
    in_chart = np.zeros(mesh.n_triangles, dtype=bool)
    in_chart[chart.triangles] = True
    chart_verts = set(np.unique(mesh.triangles[chart.triangles]).tolist())

    start_boundaries = {
        b.id for b in graph.boundaries
        if chart_id in b.chart_pair() and start_vertex in set(b.vertices)
    }
    stop_verts = set()
    for b in graph.boundaries:
        if b.id not in start_boundaries:
            stop_verts.update(b.vertices)

    cap = int(10.0 * mesh.bbox_diagonal / mesh.l_avg) + 1
    path = [start_vertex]
    visited = {start_vertex}
    cur = start_vertex
    for _ in range(cap):
        best, best_dot = -1, -np.inf
        for nb in mesh.vertex_neighbors(cur):
            nb = int(nb)
            if nb in visited or nb not in chart_verts:
                continue
            dot = float(np.dot(mesh.vertices[nb] - mesh.vertices[cur], direction))
            if dot > best_dot:
                best, best_dot = nb, dot
        if best < 0:
            break
        path.append(best)
        visited.add(best)
        cur = best
        if best in stop_verts:
            break
    if len(path) == 1:
        raise NoPathError(f"no walkable neighbor at vertex {start_vertex}")

    seeds = np.unique(np.concatenate([mesh.vertex_triangles(v) for v in path]))
    seeds = seeds[in_chart[seeds]]
    band = triangle_band(mesh, seeds, width, allowed=in_chart)
    if len(band) == 0:
        return labeling.copy()

    banned = {chart.label, opposite(chart.label)}
    walk_axis = int(np.argmax(np.abs(direction)))
    banned.update((2 * walk_axis, 2 * walk_axis + 1))
    candidates = [lab for lab in range(N_LABELS) if lab not in banned]
    scores = [
        float(np.dot(mesh.areas[band], mesh.normals[band] @ DIRECTIONS[lab]))
        for lab in candidates
    ]
    new_label = candidates[int(np.argmax(scores))]
    return labeling.with_labels(band, new_label, gen)


def chart_removal(mesh, labeling, graph, chart_id, gen, ratio=3.0):
    """Re-label one chart by expansion moves with its own label forbidden.

    The rest of the labeling is locked; its influence enters through the
    pairwise terms folded into the chart triangles' unary costs.
    """
    chart = graph.charts[chart_id]
    tris = chart.triangles
    sub_of = np.full(mesh.n_triangles, -1, dtype=np.int64)
    sub_of[tris] = np.arange(len(tris))

    fidelity = 1.0 - mesh.normals[tris] @ DIRECTIONS.T
    unary = ratio * (mesh.areas[tris] / mesh.avg_area)[:, None] * fidelity

    weights = coplanarity_weights(mesh)
    et = mesh.edge_tris
    si = sub_of[et[:, 0]]
    sj = sub_of[et[:, 1]]
    inner = (si >= 0) & (sj >= 0)
    edges = np.column_stack([si[inner], sj[inner]])
    pen = potts_penalty(N_LABELS)
    labels = labeling.labels
    for sub_side, out_side in ((0, 1), (1, 0)):
        s = (si if sub_side == 0 else sj)
        o = et[:, out_side]
        m = (s >= 0) & ((sj if sub_side == 0 else si) < 0)
        for lab in range(N_LABELS):
            np.add.at(unary[:, lab], s[m], weights[m] * pen[lab, labels[o[m]]])

    allowed = np.ones((len(tris), N_LABELS), dtype=bool)
    allowed[:, chart.label] = False
    problem = MultiLabelProblem(unary, edges, weights[inner], allowed=allowed)
    masked = np.where(allowed, unary, np.inf)
    init = np.argmin(masked, axis=1)
    result = solve_alpha_expansion(problem, init)

    out = labeling.copy()
    changed = tris[result != labels[tris]]
    out.labels[tris] = result.astype(np.uint8)
    out.stamps[changed] = gen
    return out


def chart_propagation(mesh, labeling, graph, tps, boundary_id, receiving_chart,
                      tp_index, width, gen):
    """Invade the receiving chart with the other side's label along a boundary.

    With a turning point, only the segment between the adjacent turning
    points (or path ends) propagates; a monotone boundary propagates along
    its whole length.
    """
    b = graph.boundaries[boundary_id]
    invader = b.right_chart if receiving_chart == b.left_chart else b.left_chart
    new_label = graph.charts[invader].label

    n_edges = len(b.edges)
    cuts = sorted(tps.per_boundary[boundary_id]) if tps is not None else []
    if tp_index is None or not cuts:
        edge_ids = b.edges
    else:
        edge_ids = _segment_edges(n_edges, cuts, tp_index, b.is_cycle)
        edge_ids = [b.edges[i] for i in edge_ids]

    in_recv = np.zeros(mesh.n_triangles, dtype=bool)
    in_recv[graph.charts[receiving_chart].triangles] = True
    seeds = []
    for e in edge_ids:
        for t in mesh.edge_tris[e]:
            if in_recv[t]:
                seeds.append(int(t))
    seeds = np.unique(np.array(seeds, dtype=np.int64))
    if len(seeds) == 0:
        return labeling.copy()
    band = triangle_band(mesh, seeds, width, allowed=in_recv)
    return labeling.with_labels(band, new_label, gen)


def _segment_edges(n_edges, cuts, tp_index, is_cycle):
    """Edge indices of the boundary piece between the cuts flanking tp_index."""
    others = [c for c in cuts if c != tp_index]
    if not others:
        return list(range(n_edges))
    if is_cycle:
        prev = max([c for c in others if c < tp_index], default=max(others))
        nxt = min([c for c in others if c > tp_index], default=min(others))
        if prev < tp_index:
            left = range(prev, tp_index)
        else:
            left = list(range(prev, n_edges)) + list(range(0, tp_index))
        if nxt > tp_index:
            right = range(tp_index, nxt)
        else:
            right = list(range(tp_index, n_edges)) + list(range(0, nxt))
        return list(left) + list(right)
    prev = max([c for c in others if c < tp_index], default=0)
    nxt = min([c for c in others if c > tp_index], default=n_edges)
    return list(range(prev, nxt))


MUTATION_KINDS = ("directional_path", "chart_removal", "chart_propagation")


def random_mutation(mesh, labeling, graph, tps, rng, gen, ratio=3.0, kind=None):
    """Apply one uniformly chosen mutation at a random location.

    Chart removal targets invalid charts while any remain; the path and
    propagation mutations target turning points while any remain, falling
    back to arbitrary charts / boundary vertices.  Degenerate draws return
    the labeling unchanged.  `kind` (an index into MUTATION_KINDS) forces
    one mutation type; the CLI's debug subcommand uses it.
    """
    if kind is None:
        kind = int(rng.integers(0, 3))
    width = float(rng.uniform(WIDTH_RANGE[0], WIDTH_RANGE[1])) * mesh.l_avg

    if kind == 1:
        _, _, bad_charts = invalid_sets(graph)
        pool = bad_charts if bad_charts else list(range(graph.n_charts))
        target = pool[int(rng.integers(0, len(pool)))]
        return chart_removal(mesh, labeling, graph, target, gen, ratio)

    tp_list = [
        (bid, idx)
        for bid, idxs in enumerate(tps.per_boundary)
        for idx in idxs
    ]
    if tp_list:
        bid, idx = tp_list[int(rng.integers(0, len(tp_list)))]
        vertex = graph.boundaries[bid].vertices[idx]
    else:
        bverts = sorted(_boundary_vertex_set(graph))
        if not bverts:
            return labeling.copy()
        vertex = bverts[int(rng.integers(0, len(bverts)))]
        bid = next(b.id for b in graph.boundaries if vertex in set(b.vertices))
        idx = None

    b = graph.boundaries[bid]
    side = b.chart_pair()[int(rng.integers(0, 2))]
    if kind == 0:
        chart_axis = axis_of(graph.charts[side].label)
        ortho = [lab for lab in range(N_LABELS) if axis_of(lab) != chart_axis]
        direction = DIRECTIONS[ortho[int(rng.integers(0, 4))]]
        try:
            return directional_path(mesh, labeling, graph, side, vertex,
                                    direction, width, gen)
        except NoPathError:
            return labeling.copy()
    return chart_propagation(mesh, labeling, graph, tps, bid, side, idx, width, gen)


# -- fitness-guided repairs ----------------------------------------------------


def repair_opposite_boundary(mesh, labeling, weights=FitnessWeights(), gen=0):
    """Insert a separating chart along every boundary between opposite labels.

    Per invalid boundary (lowest id first): 36 candidates = {both sides,
    left, right} x 4 remaining labels x sizes {1,2,3} average edge lengths;
    the lowest-fitness candidate is applied.  No-op when none exist.
    """
    current = labeling
    for _ in range(MAX_REPAIR_ROUNDS):
        graph = extract_charts(mesh, current)
        _, bad_bids, _ = invalid_sets(graph)
        if not bad_bids:
            break
        b = graph.boundaries[min(bad_bids)]
        la = graph.charts[b.left_chart].label
        lb = graph.charts[b.right_chart].label
        remaining = [lab for lab in range(N_LABELS) if lab not in (la, lb)]

        left_mask = np.zeros(mesh.n_triangles, dtype=bool)
        left_mask[graph.charts[b.left_chart].triangles] = True
        right_mask = np.zeros(mesh.n_triangles, dtype=bool)
        right_mask[graph.charts[b.right_chart].triangles] = True
        left_seeds = []
        right_seeds = []
        for e in b.edges:
            for t in mesh.edge_tris[e]:
                if left_mask[t]:
                    left_seeds.append(int(t))
                elif right_mask[t]:
                    right_seeds.append(int(t))
        left_seeds = np.unique(np.array(left_seeds, dtype=np.int64))
        right_seeds = np.unique(np.array(right_seeds, dtype=np.int64))

        best = None
        for side in ("both", "left", "right"):
            for lab in remaining:
                for k in REPAIR_SIZES:
                    w = k * mesh.l_avg
                    parts = []
                    if side in ("both", "left"):
                        parts.append(triangle_band(mesh, left_seeds, w, allowed=left_mask))
                    if side in ("both", "right"):
                        parts.append(triangle_band(mesh, right_seeds, w, allowed=right_mask))
                    band = np.unique(np.concatenate(parts))
                    if len(band) == 0:
                        continue
                    cand = current.with_labels(band, lab, gen)
                    fv = evaluate_fitness(mesh, cand, weights)
                    if best is None or fv.total < best[0]:
                        best = (fv.total, cand)
        if best is None:
            break
        current = best[1]
    return current


def repair_high_valency_corner(mesh, labeling, weights=FitnessWeights(), gen=0):
    """Cover every valency >= 4 corner with a small chart of an unused label.

    Candidates are (labels not borne by the incident charts) x sizes
    {1,2,3} average edge lengths of a triangle disk around the vertex; the
    lowest-fitness candidate is applied.  Corners whose incident charts
    already use all six labels are skipped with a SkipWarning.
    """
    current = labeling
    skipped = set()
    for _ in range(MAX_REPAIR_ROUNDS):
        graph = extract_charts(mesh, current)
        bad_corners, _, _ = invalid_sets(graph)
        todo = [v for v in bad_corners if v not in skipped]
        if not todo:
            break
        v = min(todo)
        tris = mesh.vertex_triangles(v)
        incident_labels = {int(current.labels[t]) for t in tris}
        remaining = [lab for lab in range(N_LABELS) if lab not in incident_labels]
        if not remaining:
            warnings.warn(
                f"corner at vertex {v} touches all six labels; left for mutations",
                SkipWarning,
            )
            skipped.add(v)
            continue
        seed_dists = np.linalg.norm(mesh.centroids[tris] - mesh.vertices[v], axis=1)
        best = None
        for lab in remaining:
            for k in REPAIR_SIZES:
                disk = triangle_band(mesh, tris, k * mesh.l_avg, seed_dists=seed_dists)
                if len(disk) == 0:
                    continue
                cand = current.with_labels(disk, lab, gen)
                fv = evaluate_fitness(mesh, cand, weights)
                if best is None or fv.total < best[0]:
                    best = (fv.total, cand)
        if best is None:
            skipped.add(v)
            continue
        current = best[1]
    return current
