"""Mesh file readers and writers.

Input: OBJ (v/f), binary and ASCII STL, ASCII PLY, and ASCII MEDIT .mesh
(Vertices / optional Triangles / Tetrahedra).  Output: OBJ and per-face
colored ASCII PLY.  Loaders return validated SurfaceMesh / TetMesh
objects; anything malformed raises ParseError.
"""

import os
import struct

import numpy as np

from .errors import ParseError
from .mesh import SurfaceMesh, TetMesh

# STL stores triangle soup; duplicates are merged within this fraction of
# the bounding-box diagonal so edge adjacency exists.
STL_MERGE_TOL = 1e-9


def load_surface(path, fmt=None):
    """Load a closed triangle surface; fmt in {'obj','stl','ply'} or inferred."""
    if fmt is None:
        fmt = os.path.splitext(path)[1].lstrip(".").lower()
    fmt = fmt.lower()
    if fmt == "obj":
        vertices, faces = _read_obj(path)
    elif fmt == "stl":
        vertices, faces = _read_stl(path)
    elif fmt == "ply":
        vertices, faces = _read_ply(path)
    else:
        raise ParseError(f"unsupported surface format: {fmt!r}")
    return SurfaceMesh(vertices, faces)


def load_tet_medit(path):
    """Load an ASCII MEDIT .mesh file holding a tetrahedral mesh."""
    vertices, tets = _read_medit(path)
    return TetMesh(vertices, tets)


# -- OBJ ---------------------------------------------------------------------

def _read_obj(path):
    vertices = []
    faces = []
    try:
        with open(path, "r", errors="replace") as fh:
            for lineno, line in enumerate(fh, 1):
                parts = line.split()
                if not parts or parts[0].startswith("#"):
                    continue
                if parts[0] == "v":
                    if len(parts) < 4:
                        raise ParseError(f"{path}:{lineno}: short vertex line")
                    vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
                elif parts[0] == "f":
                    idx = [_obj_index(tok, len(vertices), path, lineno) for tok in parts[1:]]
                    if len(idx) < 3:
                        raise ParseError(f"{path}:{lineno}: face with fewer than 3 vertices")
                    for k in range(1, len(idx) - 1):
                        faces.append([idx[0], idx[k], idx[k + 1]])
    except (ValueError, OSError) as exc:
        raise ParseError(f"cannot read OBJ {path}: {exc}") from exc
    if not vertices or not faces:
        raise ParseError(f"{path}: no vertices or faces found")
    return np.asarray(vertices), np.asarray(faces)


def _obj_index(token, n_vertices, path, lineno):
    head = token.split("/")[0]
    try:
        i = int(head)
    except ValueError as exc:
        raise ParseError(f"{path}:{lineno}: bad face index {token!r}") from exc
    if i > 0:
        return i - 1
    if i < 0:
        return n_vertices + i
    raise ParseError(f"{path}:{lineno}: OBJ indices are 1-based")


# -- STL ---------------------------------------------------------------------

def _read_stl(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 15:
        raise ParseError(f"{path}: truncated STL")
    if _is_binary_stl(blob):
        tris = _parse_stl_binary(blob, path)
    else:
        tris = _parse_stl_ascii(blob, path)
    return _merge_soup(tris)


def _is_binary_stl(blob):
    if len(blob) >= 84:
        (count,) = struct.unpack_from("<I", blob, 80)
        if len(blob) == 84 + 50 * count:
            return True
    return not blob.lstrip()[:5].lower().startswith(b"solid")


def _parse_stl_binary(blob, path):
    (count,) = struct.unpack_from("<I", blob, 80)
    if len(blob) < 84 + 50 * count:
        raise ParseError(f"{path}: binary STL shorter than its facet count")
    raw = np.frombuffer(blob, dtype=np.uint8, count=50 * count, offset=84)
    facets = raw.reshape(count, 50)[:, :48].copy().view("<f4").reshape(count, 4, 3)
    return facets[:, 1:4, :].astype(np.float64)


def _parse_stl_ascii(blob, path):
    coords = []
    try:
        for line in blob.decode(errors="replace").splitlines():
            parts = line.split()
            if parts[:1] == ["vertex"]:
                coords.append([float(parts[1]), float(parts[2]), float(parts[3])])
    except (ValueError, IndexError) as exc:
        raise ParseError(f"{path}: malformed ASCII STL: {exc}") from exc
    if not coords or len(coords) % 3:
        raise ParseError(f"{path}: ASCII STL vertex count not a multiple of 3")
    return np.asarray(coords).reshape(-1, 3, 3)


def _merge_soup(tris):
    pts = tris.reshape(-1, 3)
    diag = np.linalg.norm(pts.max(axis=0) - pts.min(axis=0))
    tol = STL_MERGE_TOL * diag if diag > 0 else STL_MERGE_TOL
    quant = np.round(pts / tol).astype(np.int64)
    _, first, inverse = np.unique(quant, axis=0, return_index=True, return_inverse=True)
    return pts[first], inverse.reshape(-1, 3)


# -- PLY ---------------------------------------------------------------------

def _read_ply(path):
    try:
        with open(path, "r", errors="replace") as fh:
            lines = [ln.strip() for ln in fh]
    except OSError as exc:
        raise ParseError(f"cannot read PLY {path}: {exc}") from exc
    if not lines or lines[0] != "ply":
        raise ParseError(f"{path}: missing 'ply' magic")
    n_vertex = n_face = None
    body = None
    for i, line in enumerate(lines[1:], 1):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "format" and parts[1] != "ascii":
            raise ParseError(f"{path}: only ASCII PLY is supported")
        if parts[0] == "element" and parts[1] == "vertex":
            n_vertex = int(parts[2])
        elif parts[0] == "element" and parts[1] == "face":
            n_face = int(parts[2])
        elif parts[0] == "end_header":
            body = i + 1
            break
    if body is None or n_vertex is None or n_face is None:
        raise ParseError(f"{path}: incomplete PLY header")
    rows = [ln.split() for ln in lines[body:] if ln]
    if len(rows) < n_vertex + n_face:
        raise ParseError(f"{path}: PLY body shorter than declared")
    try:
        vertices = np.array([[float(c) for c in row[:3]] for row in rows[:n_vertex]])
        faces = []
        for row in rows[n_vertex:n_vertex + n_face]:
            count = int(row[0])
            idx = [int(c) for c in row[1:1 + count]]
            for k in range(1, count - 1):
                faces.append([idx[0], idx[k], idx[k + 1]])
    except (ValueError, IndexError) as exc:
        raise ParseError(f"{path}: malformed PLY body: {exc}") from exc
    return vertices, np.asarray(faces)


# -- MEDIT -------------------------------------------------------------------

def _read_medit(path):
    try:
        with open(path, "r", errors="replace") as fh:
            tokens = fh.read().split()
    except OSError as exc:
        raise ParseError(f"cannot read MEDIT {path}: {exc}") from exc
    pos = 0
    vertices = None
    tets = None

    def take(n):
        nonlocal pos
        if pos + n > len(tokens):
            raise ParseError(f"{path}: truncated MEDIT file")
        out = tokens[pos:pos + n]
        pos += n
        return out

    while pos < len(tokens):
        word = tokens[pos]
        pos += 1
        low = word.lower()
        if low == "meshversionformatted":
            take(1)
        elif low == "dimension":
            (dim,) = take(1)
            if int(dim) != 3:
                raise ParseError(f"{path}: only Dimension 3 is supported")
        elif low == "vertices":
            (n,) = take(1)
            n = int(n)
            rows = take(4 * n)
            vertices = np.array(rows, dtype=np.float64).reshape(n, 4)[:, :3]
        elif low == "triangles":
            (n,) = take(1)
            take(4 * int(n))  # surface refs are unused here
        elif low == "tetrahedra":
            (n,) = take(1)
            n = int(n)
            rows = take(5 * n)
            tets = np.array(rows, dtype=np.int64).reshape(n, 5)[:, :4] - 1
        elif low == "end":
            break
        else:
            raise ParseError(f"{path}: unexpected MEDIT keyword {word!r}")
    if vertices is None:
        raise ParseError(f"{path}: missing Vertices section")
    if tets is None:
        raise ParseError(f"{path}: missing Tetrahedra section")
    return vertices, tets


# -- writers -----------------------------------------------------------------

def write_obj(path, vertices, triangles):
    with open(path, "w") as fh:
        for v in vertices:
            fh.write(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        for t in triangles:
            fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


def write_ply_face_colors(path, vertices, triangles, colors):
    """ASCII PLY with one uchar RGB per face."""
    with open(path, "w") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {len(vertices)}\n")
        fh.write("property float x\nproperty float y\nproperty float z\n")
        fh.write(f"element face {len(triangles)}\n")
        fh.write("property list uchar int vertex_indices\n")
        fh.write("property uchar red\nproperty uchar green\nproperty uchar blue\n")
        fh.write("end_header\n")
        for v in vertices:
            fh.write(f"{v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for t, c in zip(triangles, colors):
            fh.write(f"3 {t[0]} {t[1]} {t[2]} {c[0]} {c[1]} {c[2]}\n")
