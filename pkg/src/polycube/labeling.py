"""Per-triangle labelings: the optimizer's genome.

A Labeling pairs one label in 0..5 per triangle with a "stamp": the
generation at which that triangle's label last changed (0 at creation).
Stamps drive crossover conflict resolution.
"""

import hashlib

import numpy as np

from .errors import ParseError
from .labels import DIRECTIONS, N_LABELS


class Labeling:
    __slots__ = ("labels", "stamps")

    def __init__(self, labels, stamps=None):
        self.labels = np.ascontiguousarray(labels, dtype=np.uint8)
        if stamps is None:
            stamps = np.zeros(len(self.labels), dtype=np.int64)
        self.stamps = np.ascontiguousarray(stamps, dtype=np.int64)
        if len(self.stamps) != len(self.labels):
            raise ValueError("labels and stamps length mismatch")

    def __len__(self):
        return len(self.labels)

    def __eq__(self, other):
        return (
            isinstance(other, Labeling)
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.stamps, other.stamps)
        )

    def copy(self):
        return Labeling(self.labels.copy(), self.stamps.copy())

    def with_labels(self, triangle_ids, new_label, gen):
        """Copy with the given triangles relabeled and stamped at gen."""
        out = self.copy()
        triangle_ids = np.asarray(triangle_ids, dtype=np.int64)
        changed = triangle_ids[out.labels[triangle_ids] != new_label]
        out.labels[changed] = new_label
        out.stamps[changed] = gen
        return out

    def digest(self):
        """Content hash of the label vector (stamps excluded)."""
        return hashlib.sha1(self.labels.tobytes()).hexdigest()


def naive_normal_labeling(mesh):
    """Label each triangle with the axis direction closest to its normal.

    Ties break to the lowest label code (numpy argmax picks the first max).
    """
    dots = mesh.normals @ DIRECTIONS.T
    return Labeling(np.argmax(dots, axis=1).astype(np.uint8))


def smooth_boundaries(mesh, labeling, gen=None, max_iters=10):
    """Straighten chart boundaries by relabeling boundary-pinched triangles.

    Triangles are treated as neighbors only across edges lying on a chart
    boundary (edges whose two triangles carry different labels).  Any
    triangle at least two of whose boundary neighbors share a label other
    than its own takes that label; such triangles would be flattened in
    parameterization space.  Sweeps are sequential and in place (ascending
    triangle id) and iterate to a fixpoint or max_iters.  Changed triangles
    are stamped `gen` when given, otherwise they keep their previous stamp.
    """
    from . import kernels

    work = labeling.labels.astype(np.int64)
    for _ in range(max_iters):
        if kernels.smooth_sweep(work, mesh.tri_neighbors) == 0:
            break
    out = labeling.copy()
    changed = work != labeling.labels
    out.labels = work.astype(np.uint8)
    if gen is not None:
        out.stamps[changed] = gen
    return out


def read_labeling(path, expected_len=None):
    """Read the interchange format: one integer 0..5 per line."""
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                v = int(line)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: not an integer: {line!r}") from exc
            if not 0 <= v < N_LABELS:
                raise ParseError(f"{path}:{lineno}: label {v} outside 0..5")
            values.append(v)
    if expected_len is not None and len(values) != expected_len:
        raise ParseError(
            f"{path}: {len(values)} labels for a mesh with {expected_len} triangles"
        )
    return Labeling(np.array(values, dtype=np.uint8))


def write_labeling(path, labeling):
    with open(path, "w") as fh:
        fh.write("\n".join(str(int(v)) for v in labeling.labels))
        fh.write("\n")
