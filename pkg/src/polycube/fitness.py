"""Labeling fitness: fast least-squares surface polycube and the four terms.

The fast polycube constrains every vertex of a chart to one shared
coordinate on the chart's label axis (a change of variables) and solves a
least-squares problem preserving edge vectors on the remaining axes.  The
per-triangle stretch of that deformation is the workability term; fidelity,
compactness, and the validity proxy complete the score.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import kernels
from .charts import detect_turning_points, extract_charts, validity_proxy
from .errors import SolveError
from .labeling import smooth_boundaries
from .labels import DIRECTIONS, IN_PLANE_U, IN_PLANE_V, axis_of

# "Arbitrarily large" stretch assigned to flipped or collapsed triangles;
# large enough to dominate any weighted total, small enough to stay exact
# in float64 even squared.
CLAMP = 1.0e6

CG_REL_TOL = 1e-8
CG_MAX_ITER = 5000
CG_FAIL_GRAD = 1e-4


@dataclass(frozen=True)
class FitnessWeights:
    w1: float = 1.0e2
    w2: float = 1.0e-2
    w3: float = 1.0e-2


@dataclass(frozen=True)
class FitnessValue:
    validity: int
    workability: float
    fidelity: float
    compactness: int
    total: float = field(default=None)

    @classmethod
    def combine(cls, validity, workability, fidelity, compactness, weights):
        total = (
            validity
            + weights.w1 * workability
            + weights.w2 * fidelity
            + weights.w3 * compactness
        )
        return cls(int(validity), float(workability), float(fidelity),
                   int(compactness), float(total))

    def as_dict(self):
        return {
            "v_p": self.validity,
            "e_w": self.workability,
            "e_f": self.fidelity,
            "e_c": self.compactness,
            "total": self.total,
        }


class FastPolycube:
    """Least-squares axis-aligned deformation of the surface."""

    __slots__ = ("positions", "chart_coords", "tri_labels", "residual",
                 "grad_norm", "iterations")

    def __init__(self, positions, chart_coords, tri_labels, residual,
                 grad_norm, iterations):
        self.positions = positions
        self.chart_coords = chart_coords
        self.tri_labels = tri_labels
        self.residual = residual
        self.grad_norm = grad_norm
        self.iterations = iterations


def _variable_layout(mesh, graph):
    """Map every (vertex, axis) slot to a solve variable.

    Chart membership binds a slot to the chart's shared variable; distinct
    same-axis charts meeting at a vertex merge (only opposite labels can do
    that).  Unbound slots become per-slot free variables.  Returns
    (var_of_slot (V,3), x0 per variable, var id per chart).
    """
    n_charts = graph.n_charts
    chart_axis = np.array([axis_of(c.label) for c in graph.charts], dtype=np.int64)
    vc_pairs = np.unique(
        mesh.triangles.ravel() * n_charts + np.repeat(graph.tri_chart, 3)
    )
    pair_v = vc_pairs // n_charts
    pair_c = vc_pairs % n_charts

    # Merge same-axis charts that share a vertex.
    root = np.arange(n_charts, dtype=np.int64)

    def find(c):
        while root[c] != c:
            root[c] = root[root[c]]
            c = root[c]
        return c

    slot_key = pair_v * 3 + chart_axis[pair_c]
    order = np.argsort(slot_key, kind="stable")
    sk = slot_key[order]
    pc = pair_c[order]
    for i in range(1, len(sk)):
        if sk[i] == sk[i - 1]:
            ra, rb = find(pc[i - 1]), find(pc[i])
            if ra != rb:
                root[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(c) for c in range(n_charts)], dtype=np.int64)
    uniq_roots = np.unique(roots)
    chart_var = np.searchsorted(uniq_roots, roots)
    n_chart_vars = len(uniq_roots)

    var_of_slot = np.full(3 * mesh.n_vertices, -1, dtype=np.int64)
    var_of_slot[slot_key] = chart_var[pair_c]
    free = np.flatnonzero(var_of_slot < 0)
    var_of_slot[free] = n_chart_vars + np.arange(len(free))
    n_vars = n_chart_vars + len(free)

    coords = mesh.vertices.ravel()
    x0 = np.empty(n_vars)
    x0[var_of_slot[free]] = coords[free]
    # Chart variables start from the coordinate of their lowest bound slot.
    first_slot = np.full(n_chart_vars, 3 * mesh.n_vertices, dtype=np.int64)
    np.minimum.at(first_slot, chart_var[pc], sk)
    x0[:n_chart_vars] = coords[first_slot]
    return var_of_slot.reshape(-1, 3), x0, chart_var


def fast_surface_polycube(mesh, graph):
    """Solve the chart-constrained edge-preserving least-squares deformation.

    The gauge is fixed by pinning, per connected variable component, the
    lowest-id variable to its start value.  Raises SolveError when the CG
    iteration cap is reached with a gradient norm above CG_FAIL_GRAD.
    """
    var_of_slot, x0, chart_var = _variable_layout(mesh, graph)
    n_vars = len(x0)

    vi = var_of_slot[mesh.edges[:, 0]].ravel()
    vj = var_of_slot[mesh.edges[:, 1]].ravel()
    d = (mesh.vertices[mesh.edges[:, 0]] - mesh.vertices[mesh.edges[:, 1]]).ravel()
    keep = vi != vj
    # Edge terms between merged slots are constant but still part of the
    # objective value: (0 - d)^2.
    dropped_const = float(np.dot(d[~keep], d[~keep]))
    vi, vj, d = vi[keep], vj[keep], d[keep]

    adj = coo_matrix(
        (np.ones(len(vi), dtype=np.int8), (vi, vj)), shape=(n_vars, n_vars)
    )
    n_comp, comp = connected_components(adj, directed=False)
    pinned = np.zeros(n_vars, dtype=bool)
    first_of_comp = np.full(n_comp, n_vars, dtype=np.int64)
    np.minimum.at(first_of_comp, comp, np.arange(n_vars))
    pinned[first_of_comp] = True

    reduced = np.cumsum(~pinned) - 1  # valid where not pinned

    pin_i = pinned[vi]
    pin_j = pinned[vj]
    ff = ~pin_i & ~pin_j
    fp = ~pin_i & pin_j
    pf = pin_i & ~pin_j
    pp = pin_i & pin_j

    ri, rj = reduced[vi[ff]], reduced[vj[ff]]
    rows = np.concatenate([ri, rj, ri, rj, reduced[vi[fp]], reduced[vj[pf]]])
    cols = np.concatenate([ri, rj, rj, ri, reduced[vi[fp]], reduced[vj[pf]]])
    ones = np.ones(len(ri))
    vals = np.concatenate([ones, ones, -ones, -ones,
                           np.ones(fp.sum()), np.ones(pf.sum())])
    n_free = int((~pinned).sum())
    lap = coo_matrix((vals, (rows, cols)), shape=(n_free, n_free)).tocsr()

    rhs = np.zeros(n_free)
    np.add.at(rhs, ri, d[ff])
    np.add.at(rhs, rj, -d[ff])
    e_fp = x0[vj[fp]] + d[fp]
    e_pf = x0[vi[pf]] - d[pf]
    np.add.at(rhs, reduced[vi[fp]], e_fp)
    np.add.at(rhs, reduced[vj[pf]], e_pf)
    const = dropped_const + float(
        np.dot(d[ff], d[ff]) + np.dot(e_fp, e_fp) + np.dot(e_pf, e_pf)
        + np.sum((x0[vi[pp]] - x0[vj[pp]] - d[pp]) ** 2)
    )

    x_free, objective, grad_norm, iters, converged = kernels.cg_solve(
        lap.indptr.astype(np.int64), lap.indices.astype(np.int64),
        np.ascontiguousarray(lap.data, dtype=np.float64),
        np.ascontiguousarray(lap.diagonal(), dtype=np.float64),
        rhs, x0[~pinned], const, CG_REL_TOL, CG_MAX_ITER,
    )
    if not converged and grad_norm > CG_FAIL_GRAD:
        raise SolveError(
            f"fast polycube stalled: gradient norm {grad_norm:.3e} after {iters} iterations"
        )
    x = x0.copy()
    x[~pinned] = x_free
    positions = x[var_of_slot]
    chart_labels = np.array([c.label for c in graph.charts], dtype=np.uint8)
    return FastPolycube(positions, x[chart_var], chart_labels[graph.tri_chart],
                        max(objective, 0.0), grad_norm, iters)


def _deformed_edge_coords(mesh, pc):
    """2D coordinates of deformed triangle edges in their label's in-plane basis."""
    labels = pc.tri_labels
    p = pc.positions[mesh.triangles]
    f1 = p[:, 1] - p[:, 0]
    f2 = p[:, 2] - p[:, 0]
    b1 = IN_PLANE_U[labels]
    b2 = IN_PLANE_V[labels]
    q = np.empty((len(labels), 2, 2))
    q[:, 0, 0] = np.einsum("ij,ij->i", f1, b1)
    q[:, 0, 1] = np.einsum("ij,ij->i", f2, b1)
    q[:, 1, 0] = np.einsum("ij,ij->i", f1, b2)
    q[:, 1, 1] = np.einsum("ij,ij->i", f2, b2)
    return q


def stretch_per_triangle(mesh, pc):
    """(e_w, area-scale) arrays over all triangles; clamped, never NaN."""
    q = _deformed_edge_coords(mesh, pc)
    return kernels.stretch_metrics(np.ascontiguousarray(mesh.shape_inv), q, CLAMP)


def triangle_distortion(mesh, pc, t):
    """Stretch e_w of one triangle: s1+s2+1/(s1 s2)+s1/s2+s2/s1-4, clamped."""
    q = _deformed_edge_coords(mesh, pc)[t:t + 1]
    ew, _ = kernels.stretch_metrics(
        np.ascontiguousarray(mesh.shape_inv[t:t + 1]), np.ascontiguousarray(q), CLAMP
    )
    return float(ew[0])


def workability(mesh, pc):
    """Area-normalized integral of squared per-triangle stretch."""
    ew, _ = stretch_per_triangle(mesh, pc)
    return float(np.dot(mesh.areas, ew ** 2) / mesh.total_area)


def area_distortion(mesh, pc):
    """Area-normalized integral of (s1 s2 + 1/(s1 s2)) / 2; 1 is ideal."""
    _, da = stretch_per_triangle(mesh, pc)
    return float(np.dot(mesh.areas, da) / mesh.total_area)


def fidelity_error(mesh, labeling):
    """Area-normalized integral of 1 - normal . assigned direction; in [0, 2]."""
    dots = np.einsum("ij,ij->i", mesh.normals, DIRECTIONS[labeling.labels])
    return float(np.dot(mesh.areas, 1.0 - dots) / mesh.total_area)


def compactness(graph):
    """Number of corner vertices of the chart graph."""
    return len(graph.corners)


class LabelingReport:
    """Everything one evaluation produces; evaluate_fitness returns .fitness."""

    __slots__ = ("smoothed", "graph", "polycube", "fitness", "solve_failed")

    def __init__(self, smoothed, graph, polycube, fitness, solve_failed):
        self.smoothed = smoothed
        self.graph = graph
        self.polycube = polycube
        self.fitness = fitness
        self.solve_failed = solve_failed


def evaluate_labeling(mesh, labeling, weights=FitnessWeights()):
    """Smooth, extract charts, fit the fast polycube, and score every term.

    Boundary smoothing runs before every evaluation.  A failed polycube
    solve is not fatal: the labeling is scored with workability = CLAMP.
    """
    smoothed = smooth_boundaries(mesh, labeling)
    graph = extract_charts(mesh, smoothed)
    vp = validity_proxy(graph)
    ef = fidelity_error(mesh, smoothed)
    ec = compactness(graph)
    polycube = None
    solve_failed = False
    try:
        polycube = fast_surface_polycube(mesh, graph)
        ew = workability(mesh, polycube)
    except SolveError:
        ew = CLAMP
        solve_failed = True
    value = FitnessValue.combine(vp, ew, ef, ec, weights)
    return LabelingReport(smoothed, graph, polycube, value, solve_failed)


def evaluate_fitness(mesh, labeling, weights=FitnessWeights()):
    return evaluate_labeling(mesh, labeling, weights).fitness


def full_metrics(mesh, labeling, weights=FitnessWeights()):
    """Dict for the CLI `evaluate` report: fitness terms plus survey stats."""
    report = evaluate_labeling(mesh, labeling, weights)
    graph = report.graph
    tps = detect_turning_points(mesh, graph)
    if report.polycube is not None:
        d_a = area_distortion(mesh, report.polycube)
    else:
        d_a = None
    per_chart = [
        {
            "id": c.id,
            "label": c.label,
            "triangles": int(len(c.triangles)),
            "area": float(mesh.areas[c.triangles].sum()),
            "neighbors": c.n_neighbors,
        }
        for c in graph.charts
    ]
    out = report.fitness.as_dict()
    out.update(
        {
            "d_a": d_a,
            "charts": graph.n_charts,
            "boundaries": len(graph.boundaries),
            "corners": len(graph.corners),
            "turning_points": tps.count,
            "per_chart": per_chart,
            "solve_failed": report.solve_failed,
        }
    )
    return out
