import numpy as np
import pytest

from polycube import procedural
from polycube.errors import OrientationError, ParseError, TopologyError
from polycube.mesh import SurfaceMesh, extract_boundary
from polycube.meshio import load_surface, load_tet_medit, write_obj

CUBE_OBJ = """
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 4 3 2
f 5 6 7 8
f 1 2 6 5
f 2 3 7 6
f 3 4 8 7
f 4 1 5 8
""".strip()

SINGLE_TET_MEDIT = """
MeshVersionFormatted 2
Dimension 3
Vertices
4
0 0 0 0
1 0 0 0
0 1 0 0
0 0 1 0
Tetrahedra
1
1 2 3 4 0
End
""".strip()


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text + "\n")
    return str(p)


def test_cube_obj_loads(tmp_path):
    mesh = load_surface(_write(tmp_path, "cube.obj", CUBE_OBJ))
    assert mesh.n_vertices == 8
    assert mesh.n_triangles == 12
    assert mesh.total_area == pytest.approx(6.0)


def test_obj_single_triangle_is_open(tmp_path):
    path = _write(tmp_path, "tri.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3")
    with pytest.raises(TopologyError):
        load_surface(path)


def test_obj_bad_face_token(tmp_path):
    path = _write(tmp_path, "bad.obj", "v 0 0 0\nf 1 x 2")
    with pytest.raises(ParseError):
        load_surface(path)


def test_icosphere_roundtrip_obj(tmp_path, icosphere):
    path = str(tmp_path / "ico.obj")
    write_obj(path, icosphere.vertices, icosphere.triangles)
    again = load_surface(path)
    assert again.n_triangles == 1280
    # closed manifold: constructor would reject anything else
    assert np.allclose(again.vertices, icosphere.vertices)


def test_stl_binary_and_ascii_merge(tmp_path, cube):
    import struct

    tris = cube.vertices[cube.triangles]
    # binary
    blob = b"\x00" * 80 + struct.pack("<I", len(tris))
    for t in tris:
        n = np.cross(t[1] - t[0], t[2] - t[0])
        n = n / np.linalg.norm(n)
        blob += struct.pack("<12f", *n, *t[0], *t[1], *t[2]) + b"\x00\x00"
    p = tmp_path / "cube.stl"
    p.write_bytes(blob)
    mesh = load_surface(str(p))
    assert mesh.n_vertices == 8
    assert mesh.total_area == pytest.approx(6.0)
    # ascii
    lines = ["solid cube"]
    for t in tris:
        lines.append("facet normal 0 0 0")
        lines.append("outer loop")
        for v in t:
            lines.append(f"vertex {v[0]} {v[1]} {v[2]}")
        lines.append("endloop")
        lines.append("endfacet")
    lines.append("endsolid cube")
    p2 = tmp_path / "cube_ascii.stl"
    p2.write_text("\n".join(lines) + "\n")
    mesh2 = load_surface(str(p2))
    assert mesh2.n_vertices == 8
    assert mesh2.total_area == pytest.approx(6.0)


def test_ply_load(tmp_path, cube):
    lines = [
        "ply", "format ascii 1.0",
        f"element vertex {cube.n_vertices}",
        "property float x", "property float y", "property float z",
        f"element face {cube.n_triangles}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    for v in cube.vertices:
        lines.append(f"{v[0]} {v[1]} {v[2]}")
    for t in cube.triangles:
        lines.append(f"3 {t[0]} {t[1]} {t[2]}")
    p = tmp_path / "cube.ply"
    p.write_text("\n".join(lines) + "\n")
    mesh = load_surface(str(p))
    assert mesh.n_triangles == 12
    assert mesh.total_area == pytest.approx(6.0)


def test_single_tet_medit(tmp_path):
    tets = load_tet_medit(_write(tmp_path, "one.mesh", SINGLE_TET_MEDIT))
    assert tets.n_tets == 1
    boundary = extract_boundary(tets)
    assert boundary.n_triangles == 4
    # outward normals: centroid-to-face dot normal > 0
    inner = boundary.centroids - tets.vertices.mean(axis=0)
    assert np.all(np.einsum("ij,ij->i", inner, boundary.normals) > 0)


def test_medit_missing_tetrahedra(tmp_path):
    text = SINGLE_TET_MEDIT.split("Tetrahedra")[0] + "End"
    with pytest.raises(ParseError):
        load_tet_medit(_write(tmp_path, "broken.mesh", text))


def _six_tet_cube_text():
    verts = [
        (0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0),
        (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1),
    ]
    # six tets around the main diagonal 0-6
    tets = [
        (0, 1, 2, 6), (0, 2, 3, 6), (0, 3, 7, 6),
        (0, 7, 4, 6), (0, 4, 5, 6), (0, 5, 1, 6),
    ]
    lines = ["MeshVersionFormatted 2", "Dimension 3", "Vertices", "8"]
    lines += [f"{x} {y} {z} 0" for x, y, z in verts]
    lines += ["Tetrahedra", "6"]
    lines += [f"{a+1} {b+1} {c+1} {d+1} 0" for a, b, c, d in tets]
    lines.append("End")
    return "\n".join(lines)


def test_six_tet_cube_boundary(tmp_path):
    tets = load_tet_medit(_write(tmp_path, "cube6.mesh", _six_tet_cube_text()))
    assert tets.n_tets == 6
    # oracle: faces appearing in exactly one tet
    from collections import Counter

    faces = Counter()
    for tet in tets.tets:
        for f in ((0, 2, 1), (0, 1, 3), (0, 3, 2), (1, 2, 3)):
            faces[tuple(sorted(tet[list(f)]))] += 1
    expected = sum(1 for c in faces.values() if c == 1)
    boundary = extract_boundary(tets)
    assert boundary.n_triangles == expected == 12
    assert boundary.total_area == pytest.approx(6.0)


def test_two_glued_tets_boundary(tmp_path):
    text = """MeshVersionFormatted 2
Dimension 3
Vertices
5
0 0 0 0
1 0 0 0
0 1 0 0
0 0 1 0
1 1 1 0
Tetrahedra
2
1 2 3 4 0
2 3 4 5 0
End"""
    tets = load_tet_medit(_write(tmp_path, "two.mesh", text))
    boundary = extract_boundary(tets)
    assert boundary.n_triangles == 6


def test_zero_volume_tet_rejected(tmp_path):
    text = SINGLE_TET_MEDIT.replace("0 0 1 0", "1 1 0 0")  # coplanar
    with pytest.raises(OrientationError):
        load_tet_medit(_write(tmp_path, "flat.mesh", text))


def test_negative_tet_reoriented(tmp_path):
    text = SINGLE_TET_MEDIT.replace("1 2 3 4 0", "2 1 3 4 0")
    tets = load_tet_medit(_write(tmp_path, "neg.mesh", text))
    p = tets.vertices[tets.tets[0]]
    vol = np.linalg.det([p[1] - p[0], p[2] - p[0], p[3] - p[0]])
    assert vol > 0


@pytest.mark.parametrize("shape", ["cube", "icosphere_small", "l_block"])
def test_divergence_closure(shape, request):
    mesh = request.getfixturevalue(shape)
    resultant = (mesh.normals * mesh.areas[:, None]).sum(axis=0)
    assert np.abs(resultant).max() <= 1e-6 * mesh.total_area


def test_orientation_consistency(cube4):
    # every interior edge traversed in opposite directions by its triangles
    seen = {}
    for t, tri in enumerate(cube4.triangles):
        for k in range(3):
            u, v = int(tri[k]), int(tri[(k + 1) % 3])
            assert (u, v) not in seen
            seen[(u, v)] = t
    for (u, v) in seen:
        assert (v, u) in seen


def test_inward_mesh_is_reoriented(cube):
    flipped = SurfaceMesh(cube.vertices, cube.triangles[:, ::-1])
    vol = np.einsum("ij,ij,i->", flipped.centroids, flipped.normals, flipped.areas) / 3
    assert vol > 0


def test_degenerate_triangle_rejected():
    verts = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0], [0, 1, 0]], dtype=float)
    tris = np.array([[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]])
    from polycube.errors import DegenerateError

    with pytest.raises(DegenerateError):
        SurfaceMesh(verts, tris)


def test_tet_boundary_feeds_pipeline(tmp_path):
    """Smoke property: the extracted boundary runs the whole stack."""
    from polycube.labeling import naive_normal_labeling
    from polycube.fitness import evaluate_fitness

    tets = load_tet_medit(_write(tmp_path, "cube6.mesh", _six_tet_cube_text()))
    mesh = extract_boundary(tets)
    fv = evaluate_fitness(mesh, naive_normal_labeling(mesh))
    assert fv.validity == 0
