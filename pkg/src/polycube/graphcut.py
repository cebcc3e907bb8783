"""Multi-label MRF minimization by expansion moves over max-flow cuts.

Used twice in the pipeline: the initial labeling on the triangle dual
graph, and chart removal (re-labeling one chart with its old label
forbidden while the rest of the mesh is locked).
"""

import numpy as np

from . import kernels
from .errors import InfeasibleError
from .labeling import Labeling, naive_normal_labeling
from .labels import DIRECTIONS, N_LABELS

# Width of the Gaussian-on-dot-product coplanarity weight: neighbors with
# nearly parallel normals pay the most for a label change.
COPLANARITY_WIDTH = 0.25
MAX_SWEEPS = 10


def potts_penalty(k):
    return np.ones((k, k)) - np.eye(k)


class MultiLabelProblem:
    """Unary costs per node/label plus weighted pairwise label penalties."""

    def __init__(self, unary, edges, weights, penalty=None,
                 allowed=None, locked=None):
        self.unary = np.ascontiguousarray(unary, dtype=np.float64)
        self.n, self.k = self.unary.shape
        self.edges = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
        self.weights = np.ascontiguousarray(weights, dtype=np.float64)
        self.penalty = potts_penalty(self.k) if penalty is None else np.asarray(penalty, dtype=np.float64)
        if self.penalty.shape != (self.k, self.k):
            raise ValueError("penalty table must be K x K")
        if not np.allclose(self.penalty, self.penalty.T) or np.any(np.diag(self.penalty) != 0):
            raise ValueError("penalty table must be symmetric with zero diagonal")
        self.allowed = None if allowed is None else np.asarray(allowed, dtype=bool)
        self.locked = None if locked is None else np.asarray(locked, dtype=bool)
        if self.allowed is not None and not self.allowed.any(axis=1).all():
            raise InfeasibleError("a node has every label forbidden")

    def energy(self, labels):
        labels = np.asarray(labels)
        total = float(self.unary[np.arange(self.n), labels].sum())
        li = labels[self.edges[:, 0]]
        lj = labels[self.edges[:, 1]]
        total += float((self.weights * self.penalty[li, lj]).sum())
        return total


def _build_flow_arcs(n, tails, heads, caps):
    """CSR arc arrays for the max-flow kernel; arcs 2e/2e+1 are reverse pairs."""
    order = np.lexsort((np.arange(len(tails)), tails))
    inv = np.empty_like(order)
    inv[order] = np.arange(len(order))
    rev = np.arange(len(tails)) ^ 1
    first = np.zeros(n + 1, dtype=np.int64)
    np.add.at(first, tails + 1, 1)
    np.cumsum(first, out=first)
    return first, heads[order].copy(), inv[rev][order].copy(), caps[order].copy()


def max_flow_min_cut(n, cap_source, cap_sink, edge_i, edge_j, cap_ij, cap_ji):
    """Max flow / min cut between implicit terminals over undirected node pairs.

    Returns (flow value, source_side boolean array).
    """
    m = len(edge_i)
    tails = np.empty(2 * m, dtype=np.int64)
    heads = np.empty(2 * m, dtype=np.int64)
    caps = np.empty(2 * m, dtype=np.float64)
    tails[0::2] = edge_i
    tails[1::2] = edge_j
    heads[0::2] = edge_j
    heads[1::2] = edge_i
    caps[0::2] = cap_ij
    caps[1::2] = cap_ji
    first, arc_head, arc_rev, arc_cap = _build_flow_arcs(n, tails, heads, caps)
    return kernels.max_flow(
        np.ascontiguousarray(cap_source, dtype=np.float64),
        np.ascontiguousarray(cap_sink, dtype=np.float64),
        first, arc_head, arc_rev, arc_cap,
    )


def _expansion_move(problem, labels, alpha):
    """One alpha-expansion: the optimal subset of movable nodes adopts alpha."""
    movable = labels != alpha
    if problem.locked is not None:
        movable &= ~problem.locked
    if problem.allowed is not None:
        movable &= problem.allowed[:, alpha]
    idx = np.flatnonzero(movable)
    if len(idx) == 0:
        return labels
    node_of = np.full(problem.n, -1, dtype=np.int64)
    node_of[idx] = np.arange(len(idx))

    cur = labels[idx]
    theta0 = problem.unary[idx, cur].copy()
    theta1 = problem.unary[idx, alpha].copy()

    ei = problem.edges[:, 0]
    ej = problem.edges[:, 1]
    w = problem.weights
    pen = problem.penalty
    fi = node_of[ei]
    fj = node_of[ej]
    li = labels[ei]
    lj = labels[ej]

    both = (fi >= 0) & (fj >= 0)
    a = w[both] * pen[li[both], lj[both]]
    b = w[both] * pen[li[both], alpha]
    c = w[both] * pen[alpha, lj[both]]
    lam = b + c - a
    np.add.at(theta1, fi[both], c - a)
    np.add.at(theta1, fj[both], -c)

    # Edges with one movable endpoint fold into that endpoint's unaries;
    # the frozen endpoint keeps its current label either way.
    only_i = (fi >= 0) & ~both
    if only_i.any():
        np.add.at(theta0, fi[only_i], w[only_i] * pen[li[only_i], lj[only_i]])
        np.add.at(theta1, fi[only_i], w[only_i] * pen[alpha, lj[only_i]])
    only_j = (fj >= 0) & ~both
    if only_j.any():
        np.add.at(theta0, fj[only_j], w[only_j] * pen[li[only_j], lj[only_j]])
        np.add.at(theta1, fj[only_j], w[only_j] * pen[li[only_j], alpha])

    shift = np.minimum(theta0, theta1)
    cap_source = theta1 - shift
    cap_sink = theta0 - shift

    pos = lam > 0
    _, source_side = max_flow_min_cut(
        len(idx), cap_source, cap_sink,
        fi[both][pos], fj[both][pos], lam[pos], np.zeros(pos.sum()),
    )
    out = labels.copy()
    out[idx[~source_side]] = alpha
    return out


def solve_alpha_expansion(problem, init, seed=None, max_sweeps=MAX_SWEEPS,
                          collect_stats=False):
    """Sweep expansion moves over labels 0..K-1 until no move improves.

    `seed` is accepted for interface stability; sweeps run in the fixed
    ascending label order, so the result is deterministic.  Returns the
    labeling (and per-sweep energies when collect_stats).
    """
    labels = np.ascontiguousarray(init, dtype=np.int64).copy()
    if problem.allowed is not None:
        ok = problem.allowed[np.arange(problem.n), labels]
        if problem.locked is not None:
            ok |= problem.locked
        if not ok.all():
            raise InfeasibleError("initial assignment uses a forbidden label")
    energy = problem.energy(labels)
    sweep_energies = [energy]
    for _ in range(max_sweeps):
        improved = False
        for alpha in range(problem.k):
            cand = _expansion_move(problem, labels, alpha)
            cand_energy = problem.energy(cand)
            if cand_energy < energy:
                labels, energy = cand, cand_energy
                improved = True
        sweep_energies.append(energy)
        if not improved:
            break
    if collect_stats:
        return labels, sweep_energies
    return labels


def coplanarity_weights(mesh):
    """Pairwise weight per mesh dual edge: ~1 when coplanar, ~0 across creases."""
    n1 = mesh.normals[mesh.edge_tris[:, 0]]
    n2 = mesh.normals[mesh.edge_tris[:, 1]]
    dots = np.einsum("ij,ij->i", n1, n2)
    return np.exp(-0.5 * ((dots - 1.0) / COPLANARITY_WIDTH) ** 2)


def labeling_problem(mesh, ratio, allowed=None, locked=None):
    """The 6-label dual-graph problem behind initialization and chart removal."""
    fidelity = 1.0 - mesh.normals @ DIRECTIONS.T
    unary = ratio * (mesh.areas / mesh.avg_area)[:, None] * fidelity
    return MultiLabelProblem(
        unary, mesh.edge_tris, coplanarity_weights(mesh),
        allowed=allowed, locked=locked,
    )


def graphcut_initial_labeling(mesh, ratio=3.0):
    """Initial labeling trading normal alignment against boundary length.

    Neighbors with opposite orientations are permitted here; the repair
    pass deals with them.
    """
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    problem = labeling_problem(mesh, ratio)
    init = naive_normal_labeling(mesh).labels.astype(np.int64)
    labels = solve_alpha_expansion(problem, init)
    return Labeling(labels.astype(np.uint8))
