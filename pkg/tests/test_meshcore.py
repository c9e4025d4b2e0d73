import math

import numpy as np
import pytest

from denoisekit import (
    DegenerateFaceError,
    NeighborhoodSpec,
    NonManifoldError,
    ParseError,
    TriMesh,
    convert_normal_args,
    load_mesh,
    make_cube,
    make_icosphere,
    make_plane,
    save_mesh,
)
from conftest import rotation_matrix

TRI_OBJ = """\
v 0 0 0
v 1 0 0
v 0 1 0
f 1 2 3
"""

CUBE_OBJ = """\
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 3 2
f 1 4 3
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 2 3 7
f 2 7 6
f 3 4 8
f 3 8 7
f 4 1 5
f 4 5 8
"""


# ----------------------------------------------------------------------
# loading

def test_load_single_triangle(tmp_path):
    p = tmp_path / "t.obj"
    p.write_text(TRI_OBJ)
    m = load_mesh(p)
    assert len(m.faces) == 1
    assert np.allclose(m.face_normals[0], [0, 0, 1])
    assert np.allclose(m.face_centroids[0], [1 / 3, 1 / 3, 0])
    assert abs(m.face_areas[0] - 0.5) < 1e-15


def test_load_short_face_errors(tmp_path):
    p = tmp_path / "bad.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nf 1 2\n")
    with pytest.raises(ParseError, match="line 3"):
        load_mesh(p)


def test_load_bad_coordinate_errors(tmp_path):
    p = tmp_path / "bad.obj"
    p.write_text("v 0 zero 0\n")
    with pytest.raises(ParseError, match="line 1"):
        load_mesh(p)


def test_cube_average_edge_length(tmp_path):
    p = tmp_path / "cube.obj"
    p.write_text(CUBE_OBJ)
    m = load_mesh(p)
    assert len(m.edges) == 18
    expected = (12 * 1.0 + 6 * math.sqrt(2.0)) / 18.0
    assert abs(m.avg_edge_length - expected) < 1e-12


def test_quad_fan_triangulation(tmp_path):
    p = tmp_path / "quad.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    m = load_mesh(p)
    assert len(m.faces) == 2
    assert m.faces.tolist() == [[0, 1, 2], [0, 2, 3]]


def test_negative_obj_indices(tmp_path):
    p = tmp_path / "neg.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n")
    m = load_mesh(p)
    assert m.faces.tolist() == [[0, 1, 2]]


def test_load_ascii_ply(tmp_path):
    p = tmp_path / "t.ply"
    p.write_text(
        "ply\nformat ascii 1.0\nelement vertex 3\n"
        "property float x\nproperty float y\nproperty float z\n"
        "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
        "0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
    m = load_mesh(p)
    assert len(m.vertices) == 3 and len(m.faces) == 1


def test_binary_ply_rejected(tmp_path):
    p = tmp_path / "t.ply"
    p.write_text("ply\nformat binary_little_endian 1.0\nend_header\n")
    with pytest.raises(ParseError):
        load_mesh(p)


def test_degenerate_face_rejected():
    with pytest.raises(DegenerateFaceError):
        TriMesh([[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[0, 1, 2]])


def test_face_index_out_of_range():
    with pytest.raises(Exception):
        TriMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 5]])


# ----------------------------------------------------------------------
# saving

def test_roundtrip_triangle(tmp_path):
    m = TriMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
    p = tmp_path / "t.obj"
    save_mesh(m, p)
    m2 = load_mesh(p)
    assert np.array_equal(m.faces, m2.faces)
    assert np.max(np.abs(m.vertices - m2.vertices)) < 1e-8


def test_roundtrip_cube(tmp_path):
    m = make_cube(3)
    p = tmp_path / "c.obj"
    save_mesh(m, p)
    m2 = load_mesh(p)
    assert np.array_equal(m.faces, m2.faces)
    assert np.max(np.abs(m.vertices - m2.vertices)) < 1e-8


def test_save_empty_mesh(tmp_path):
    m = TriMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=int))
    p = tmp_path / "e.obj"
    save_mesh(m, p)
    assert p.read_text() == ""


# ----------------------------------------------------------------------
# neighborhoods

def test_interior_face_shared_edge_neighbors(plane5):
    # pick a face whose three edges are all interior
    spec = NeighborhoodSpec("shared_edge", include_self=False)
    counts = [len(plane5.face_neighbors(i, spec)) for i in range(len(plane5.faces))]
    assert max(counts) == 3
    vspec = NeighborhoodSpec("shared_vertex", include_self=False)
    vcounts = [len(plane5.face_neighbors(i, vspec)) for i in range(len(plane5.faces))]
    # faces fully away from the boundary see 12 vertex-ring neighbors
    deep = [i for i, c in enumerate(vcounts) if c == 12]
    assert deep
    assert all(counts[i] == 3 for i in deep)


def test_include_self_and_sorted(plane5):
    spec = NeighborhoodSpec("shared_vertex", include_self=True)
    for i in (0, 7, 15):
        nb = plane5.face_neighbors(i, spec)
        assert i in nb
        assert np.all(np.diff(nb) > 0)


def test_tiny_radius_neighborhood(plane5):
    spec = NeighborhoodSpec("radius", radius=1e-9, include_self=True)
    assert plane5.face_neighbors(3, spec).tolist() == [3]


def test_neighborhood_symmetry(plane5):
    for mode in ("shared_edge", "shared_vertex"):
        spec = NeighborhoodSpec(mode, include_self=False)
        lists = plane5.neighbor_lists(spec)
        for i, nb in enumerate(lists):
            for j in nb:
                assert i in lists[j]


def test_neighborhood_spec_validation():
    with pytest.raises(ValueError):
        NeighborhoodSpec("geodesic")
    with pytest.raises(ValueError):
        NeighborhoodSpec("radius")


# ----------------------------------------------------------------------
# derived fields

def test_translation_keeps_normals(plane5):
    t = np.array([3.0, -2.0, 0.5])
    m2 = TriMesh(plane5.vertices + t, plane5.faces)
    assert np.max(np.abs(m2.face_normals - plane5.face_normals)) < 1e-12
    assert np.max(np.abs(m2.face_centroids - (plane5.face_centroids + t))) < 1e-12


def test_rotation_rotates_normals(cube2):
    R = rotation_matrix([1, 2, 3], 0.7)
    m2 = TriMesh(cube2.vertices @ R.T, cube2.faces)
    assert np.max(np.abs(m2.face_normals - cube2.face_normals @ R.T)) < 1e-9


def test_normals_unit(cube2):
    assert np.max(np.abs(np.linalg.norm(cube2.face_normals, axis=1) - 1.0)) < 1e-9


def test_recompute_deterministic(cube2):
    n1 = cube2.face_normals.copy()
    cube2.recompute_face_fields()
    assert np.array_equal(n1, cube2.face_normals)


# ----------------------------------------------------------------------
# curvature

def test_flat_grid_curvature_zero(plane5):
    k = plane5.vertex_mean_curvature()
    assert np.max(k) < 1e-9


def test_sphere_curvature_near_one():
    m = make_icosphere(2)
    k = m.vertex_mean_curvature()
    assert abs(k.mean() - 1.0) < 0.15


def test_cube_edge_curvature_exceeds_interior():
    m = make_cube(4)
    k = m.vertex_mean_curvature()
    on_boundary_planes = (np.isclose(m.vertices, 0) | np.isclose(m.vertices, 1)).sum(axis=1)
    interior = k[on_boundary_planes == 1]
    edge = k[on_boundary_planes >= 2]
    assert edge.min() > interior.max()


def test_nonmanifold_curvature_error():
    verts = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1]]
    faces = [[0, 1, 2], [0, 1, 3], [0, 1, 4]]
    m = TriMesh(verts, faces)
    with pytest.raises(NonManifoldError):
        m.vertex_mean_curvature()


# ----------------------------------------------------------------------
# conversions, features, volume

def test_convert_normal_args():
    d, a, ad = convert_normal_args(math.sqrt(2.0), "distance")
    assert abs(a - math.pi / 2) < 1e-12 and a == ad
    assert convert_normal_args(0.0, "distance")[1] == 0.0
    assert abs(convert_normal_args(2.0, "distance")[1] - math.pi) < 1e-12
    d, a, _ = convert_normal_args(math.pi / 3, "angle")
    assert abs(d - 1.0) < 1e-12


def test_convert_normal_args_validation():
    with pytest.raises(ValueError):
        convert_normal_args(2.5, "distance")
    with pytest.raises(ValueError):
        convert_normal_args(4.0, "angle")
    with pytest.raises(ValueError):
        convert_normal_args(1.0, "cosine")


def test_cube_feature_edges(cube2):
    feats = cube2.dihedral_feature_edges(70.0)
    assert len(feats) == 12


def test_flat_grid_no_feature_edges(plane5):
    assert len(plane5.dihedral_feature_edges(70.0)) == 0
    interior = sum(1 for fs in plane5.edge_faces if len(fs) == 2)
    assert len(plane5.dihedral_feature_edges(0.0)) == interior


def test_volume_cube(cube2):
    assert abs(cube2.volume() - 1.0) < 1e-12
    mirrored = TriMesh(cube2.vertices * [-1, 1, 1], cube2.faces)
    assert abs(mirrored.volume() + 1.0) < 1e-12


def test_volume_sphere():
    v = make_icosphere(2).volume()
    assert abs(v - 4.0 * math.pi / 3.0) / (4.0 * math.pi / 3.0) < 0.05
