import itertools

import numpy as np
import pytest

from polycube import procedural
from polycube.charts import (
    boundary_axis,
    chain_energy,
    detect_turning_points,
    extract_charts,
    solve_chain,
    turning_costs,
)
from polycube.labeling import Labeling, naive_normal_labeling


def brute_force_energy(unary, switch_cost, cyclic):
    n = len(unary)
    return min(
        chain_energy(unary, switch_cost, list(lbl), cyclic)
        for lbl in itertools.product((0, 1), repeat=n)
    )


def test_straight_boundary_no_turning_points():
    pts = np.column_stack([np.arange(5.0), np.zeros(5), np.zeros(5)])
    unary, b = turning_costs(pts, np.array([1.0, 0.0, 0.0]), cyclic=False)
    labels = solve_chain(unary, b, cyclic=False)
    assert labels == [0, 0, 0, 0]
    assert chain_energy(unary, b, labels, False) == 0.0


def test_four_edge_reversal_single_switch():
    # edge directions +x, +x, -x, -x
    pts = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0], [1, 0, 0], [0, 0, 0]], dtype=float)
    unary, b = turning_costs(pts, np.array([1.0, 0.0, 0.0]), cyclic=False)
    labels = solve_chain(unary, b, cyclic=False)
    e = chain_energy(unary, b, labels, False)
    assert e == brute_force_energy(unary, b, False)
    assert labels == [0, 0, 1, 1]  # one switch, between edges 2 and 3


def test_u_turn_matches_enumeration():
    rng = np.random.default_rng(0)
    base = np.array([[0, 0, 0], [1, 0, 0], [0.9, 1, 0], [1.9, 1.1, 0]])
    pts = base + rng.normal(scale=0.05, size=base.shape)
    unary, b = turning_costs(pts, np.array([1.0, 0.0, 0.0]), cyclic=False)
    labels = solve_chain(unary, b, cyclic=False)
    assert chain_energy(unary, b, labels, False) == brute_force_energy(unary, b, False)


@pytest.mark.parametrize("cyclic", [False, True])
def test_dp_equals_enumeration_random(cyclic):
    rng = np.random.default_rng(42 if cyclic else 24)
    for _ in range(100):
        n = int(rng.integers(3 if cyclic else 1, 13))
        pts = rng.normal(size=(n + (0 if cyclic else 1), 3))
        axis = np.zeros(3)
        axis[rng.integers(0, 3)] = rng.choice([-1.0, 1.0])
        unary, b = turning_costs(pts, axis, cyclic)
        labels = solve_chain(unary, b, cyclic)
        assert chain_energy(unary, b, labels, cyclic) == brute_force_energy(unary, b, cyclic)


def test_boundary_axis_signs(cube):
    g = extract_charts(cube, naive_normal_labeling(cube))
    from polycube.labels import DIRECTIONS

    for b in g.boundaries:
        axis = boundary_axis(g, b)
        la = g.charts[b.left_chart].label
        lb = g.charts[b.right_chart].label
        assert np.allclose(axis, np.cross(DIRECTIONS[la], DIRECTIONS[lb]))
        assert np.linalg.norm(axis) == pytest.approx(1.0)


def test_cube_has_no_turning_points(cube):
    g = extract_charts(cube, naive_normal_labeling(cube))
    tps = detect_turning_points(cube, g)
    assert tps.count == 0


def test_opposite_label_boundary_skipped(cube4, face_cells_fn):
    lab = naive_normal_labeling(cube4)
    cells = face_cells_fn(cube4, 2, +1, 4)
    tris = [t for k in [(1, 1), (2, 1), (1, 2), (2, 2)] for t in cells[k]]
    lab = lab.with_labels(np.array(tris), 5, 1)  # -Z island inside +Z
    g = extract_charts(cube4, lab)
    tps = detect_turning_points(cube4, g)
    # the island boundary has opposite labels: exempt from turning points
    opp = [
        b.id for b in g.boundaries
        if g.charts[b.left_chart].label ^ 1 == g.charts[b.right_chart].label
    ]
    assert opp
    for bid in opp:
        assert tps.per_boundary[bid] == []


def test_overhang_boundary_has_turning_points(face_cells_fn):
    """A T-shaped peninsula forces the chart boundary to backtrack along
    its travel axis; the reversal vertices are flagged, strictly inside
    the path."""
    n = 6
    mesh = procedural.cube(subdiv=n)
    lab = naive_normal_labeling(mesh)
    cells = face_cells_fn(mesh, 2, +1, n)
    region = {(i, j) for i in range(n) for j in range(4, n)}      # body
    region |= {(3, 3)}                                            # neck
    region |= {(i, 2) for i in range(n)}                          # head
    paint = [t for key in region for t in cells[key]]
    lab = lab.with_labels(np.array(paint), 2, 1)  # +Y region
    g = extract_charts(mesh, lab)
    tps = detect_turning_points(mesh, g)
    assert tps.count > 0
    for bid, idxs in enumerate(tps.per_boundary):
        b = g.boundaries[bid]
        for i in idxs:
            if not b.is_cycle:
                assert 0 < i < len(b.vertices) - 1
