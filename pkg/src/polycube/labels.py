"""The six axis labels and their helpers.

Labels are encoded 0..5 as {0:+X, 1:-X, 2:+Y, 3:-Y, 4:+Z, 5:-Z}: the axis is
``label // 2`` and flipping the low bit yields the opposite direction.
"""

import numpy as np

N_LABELS = 6

LABEL_NAMES = ("+X", "-X", "+Y", "-Y", "+Z", "-Z")

# Unit direction of each label, row i = direction of label i.
DIRECTIONS = np.array(
    [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ]
)
DIRECTIONS.setflags(write=False)

# Per-face colors used by the visualization export.
LABEL_COLORS = np.array(
    [
        [255, 0, 0],  # +X red
        [128, 0, 0],  # -X dark red
        [0, 255, 0],  # +Y green
        [0, 128, 0],  # -Y dark green
        [0, 0, 255],  # +Z blue
        [0, 0, 128],  # -Z dark blue
    ],
    dtype=np.uint8,
)
LABEL_COLORS.setflags(write=False)


def axis_of(label):
    """Axis index 0/1/2 (X/Y/Z) of a label; works on arrays too."""
    return label // 2


def opposite(label):
    """Label pointing the other way along the same axis."""
    return label ^ 1


def direction(label):
    """Unit 3-vector of a label."""
    return DIRECTIONS[label]


def label_name(label):
    return LABEL_NAMES[label]


# Right-handed in-plane basis per label: for label l with direction d, the
# pair (IN_PLANE_U[l], IN_PLANE_V[l]) satisfies u x v = d.  Used to give the
# deformed (axis-aligned) triangles 2D coordinates whose orientation encodes
# whether the map flipped.
_u = np.zeros((6, 3))
_v = np.zeros((6, 3))
for _l in range(6):
    _d = DIRECTIONS[_l]
    _a = (axis_of(_l) + 1) % 3
    _u[_l, _a] = 1.0
    _v[_l] = np.cross(_d, _u[_l])
IN_PLANE_U = _u
IN_PLANE_V = _v
IN_PLANE_U.setflags(write=False)
IN_PLANE_V.setflags(write=False)
del _u, _v, _l, _d, _a
