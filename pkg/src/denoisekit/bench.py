"""Synthetic shapes, seeded noise injection and denoise quality metrics."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .meshcore import TriMesh
from .pointcloud import PointCloud


# ----------------------------------------------------------------------
# shapes

def _weld(vertices, faces, decimals=9):
    """Merge vertices that coincide up to rounding; reindex faces."""
    v = np.asarray(vertices, dtype=float)
    key = np.round(v, decimals)
    uniq, inv = np.unique(key, axis=0, return_inverse=True)
    # keep the first original coordinates for each welded vertex
    first = np.full(len(uniq), -1, dtype=np.int64)
    for i, g in enumerate(inv):
        if first[g] < 0:
            first[g] = i
    out_v = v[first]
    out_f = inv[np.asarray(faces, dtype=np.int64)]
    return out_v, out_f


def make_plane(n: int, scale: float = 1.0) -> TriMesh:
    """n x n vertex grid on z=0, diagonal-split quads; 2(n-1)^2 faces."""
    if n < 2:
        raise ValueError("n must be >= 2")
    xs = np.linspace(0.0, scale, n)
    vv = np.array([[x, y, 0.0] for y in xs for x in xs])
    faces = []
    for j in range(n - 1):
        for i in range(n - 1):
            a = j * n + i
            b = a + 1
            c = a + n
            d = c + 1
            faces.append([a, b, d])
            faces.append([a, d, c])
    return TriMesh(vv, np.array(faces))


def _grid_face(origin, eu, ev, n, scale):
    """One cube face as an (n-1)x(n-1) quad grid, each quad center-split."""
    origin = np.asarray(origin, dtype=float) * scale
    eu = np.asarray(eu, dtype=float) * scale
    ev = np.asarray(ev, dtype=float) * scale
    verts = []
    faces = []
    def V(p):
        verts.append(p)
        return len(verts) - 1
    ts = np.linspace(0.0, 1.0, n)
    grid = [[V(origin + u * eu + v * ev) for u in ts] for v in ts]
    for j in range(n - 1):
        for i in range(n - 1):
            a = grid[j][i]
            b = grid[j][i + 1]
            c = grid[j + 1][i + 1]
            d = grid[j + 1][i]
            u0, u1 = ts[i], ts[i + 1]
            v0, v1 = ts[j], ts[j + 1]
            ctr = V(origin + 0.5 * (u0 + u1) * eu + 0.5 * (v0 + v1) * ev)
            faces += [[a, b, ctr], [b, c, ctr], [c, d, ctr], [d, a, ctr]]
    return np.array(verts), np.array(faces)


def make_cube(n: int, scale: float = 1.0) -> TriMesh:
    """Axis-aligned solid cube [0, scale]^3; n vertices per edge, each quad
    split into 4 triangles about its center. 24(n-1)^2 faces, outward normals."""
    if n < 2:
        raise ValueError("n must be >= 2")
    # (origin, eu, ev) chosen so eu x ev points outward
    specs = [
        ([0, 0, 0], [0, 1, 0], [1, 0, 0]),  # z=0, normal -z
        ([0, 0, 1], [1, 0, 0], [0, 1, 0]),  # z=1, normal +z
        ([0, 0, 0], [1, 0, 0], [0, 0, 1]),  # y=0, normal -y
        ([0, 1, 0], [0, 0, 1], [1, 0, 0]),  # y=1, normal +y
        ([0, 0, 0], [0, 0, 1], [0, 1, 0]),  # x=0, normal -x
        ([1, 0, 0], [0, 1, 0], [0, 0, 1]),  # x=1, normal +x
    ]
    all_v = []
    all_f = []
    offset = 0
    for origin, eu, ev in specs:
        v, f = _grid_face(origin, eu, ev, n, scale)
        all_v.append(v)
        all_f.append(f + offset)
        offset += len(v)
    v, f = _weld(np.vstack(all_v), np.vstack(all_f))
    return TriMesh(v, f)


def make_icosphere(level: int, scale: float = 1.0) -> TriMesh:
    """Unit icosahedron subdivided ``level`` times, projected to the sphere."""
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ], dtype=float)
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    faces = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    for _ in range(level):
        new_faces = []
        verts = list(verts)
        midcache = {}
        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in midcache:
                m = (np.asarray(verts[a]) + np.asarray(verts[b])) / 2.0
                m /= np.linalg.norm(m)
                verts.append(m)
                midcache[key] = len(verts) - 1
            return midcache[key]
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = np.array(new_faces)
        verts = np.array(verts)
    return TriMesh(np.asarray(verts) * scale, faces)


def make_wedge(scale: float = 1.0, n: int = 4) -> TriMesh:
    """A house-shaped prism (box with a gabled top): flat patches meeting at
    sharp edges of several dihedral angles, a desk-scale CAD stand-in."""
    if n < 2:
        raise ValueError("n must be >= 2")
    # cross-section in the (x, z) plane, extruded along y
    profile = np.array([
        [0.0, 0.0], [1.0, 0.0], [1.0, 0.6], [0.5, 1.0], [0.0, 0.6],
    ]) * scale
    m = len(profile)
    depth = 1.2 * scale
    ys = np.linspace(0.0, depth, n)
    verts = []
    for y in ys:
        for x, z in profile:
            verts.append([x, y, z])
    verts = np.array(verts)
    faces = []
    # side walls between consecutive profile edges, quads split by diagonal
    for j in range(n - 1):
        for i in range(m):
            a = j * m + i
            b = j * m + (i + 1) % m
            c = (j + 1) * m + (i + 1) % m
            d = (j + 1) * m + i
            faces += [[a, c, b], [a, d, c]]
    # end caps (fan around the profile polygon)
    for i in range(1, m - 1):
        faces.append([0, i, i + 1])                             # y = 0 cap, -y out
        base = (n - 1) * m
        faces.append([base, base + i + 1, base + i])            # y = depth cap, +y out
    return TriMesh(verts, np.array(faces))


SHAPE_KINDS = ("cube", "plane", "icosphere", "wedge")


def make_shape(kind: str, n: int = 4, scale: float = 1.0) -> TriMesh:
    if kind == "cube":
        return make_cube(n, scale)
    if kind == "plane":
        return make_plane(n, scale)
    if kind == "icosphere":
        return make_icosphere(n, scale)
    if kind in ("wedge", "fandisk-like"):
        return make_wedge(scale, max(n, 2))
    raise ValueError(f"unknown shape {kind!r}; valid: {SHAPE_KINDS}")


# ----------------------------------------------------------------------
# noise

def _noise_displacements(n: int, sigma: float, seed: int) -> np.ndarray:
    """Counter-based deterministic noise: magnitude ~ N(0, sigma^2) along a
    uniformly random unit direction, per vertex."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    dirs = rng.normal(size=(n, 3))
    dirs /= np.maximum(np.linalg.norm(dirs, axis=1), 1e-300)[:, None]
    mags = rng.normal(0.0, 1.0, size=n) * sigma
    return mags[:, None] * dirs


def add_noise(obj, sigma_factor: float, seed: int):
    """Return a noisy copy; amplitude is sigma_factor times the average edge
    length (meshes) or the mean nearest-neighbor spacing (clouds)."""
    if sigma_factor < 0:
        raise ValueError("sigma_factor must be >= 0")
    if isinstance(obj, TriMesh):
        sigma = sigma_factor * obj.avg_edge_length
        disp = _noise_displacements(len(obj.vertices), sigma, seed) if sigma_factor else 0.0
        return TriMesh(obj.vertices + disp, obj.faces.copy(), validate=False)
    if isinstance(obj, PointCloud):
        if len(obj) > 1 and sigma_factor:
            d = np.array([np.linalg.norm(obj.points[obj.knn(i, 1)[0]] - obj.points[i])
                          for i in range(len(obj))])
            sigma = sigma_factor * float(d.mean())
            disp = _noise_displacements(len(obj), sigma, seed)
        else:
            disp = 0.0
        return PointCloud(obj.points + disp,
                          None if obj.normals is None else obj.normals.copy())
    raise TypeError(f"cannot add noise to {type(obj).__name__}")


# ----------------------------------------------------------------------
# metrics

@dataclass
class MetricsReport:
    mean_angular_error_deg: float
    max_angular_error_deg: float
    mean_vertex_distance: float
    volume_before: float
    volume_after: float
    relative_volume_change: float
    feature_edge_count: int
    warnings: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    CSV_FIELDS = ("mean_angular_error_deg", "max_angular_error_deg",
                  "mean_vertex_distance", "volume_before", "volume_after",
                  "relative_volume_change", "feature_edge_count")

    def to_csv_row(self) -> str:
        vals = [getattr(self, f) for f in self.CSV_FIELDS]
        return ",".join(f"{v:.10g}" if isinstance(v, float) else str(v) for v in vals)


def angular_errors_deg(gt_normals, cand_normals) -> np.ndarray:
    a = np.asarray(gt_normals, dtype=float)
    b = np.asarray(cand_normals, dtype=float)
    dots = np.clip(np.einsum("ij,ij->i", a, b), -1.0, 1.0)
    return np.degrees(np.arccos(dots))


def compare(ground_truth, candidate, feature_threshold_deg: float = 70.0,
            candidate_normals=None, warnings=None) -> MetricsReport:
    """Quality metrics of a candidate against its ground truth.

    Meshes must share connectivity; clouds must share cardinality.
    ``candidate_normals`` overrides the candidate's own face normals (to score
    a filtered normal field before any vertex update).
    """
    if isinstance(ground_truth, TriMesh):
        if ground_truth.faces.shape != candidate.faces.shape or \
                np.any(ground_truth.faces != candidate.faces):
            raise ValueError("meshes must share connectivity")
        nc = candidate.face_normals if candidate_normals is None else candidate_normals
        errs = angular_errors_deg(ground_truth.face_normals, nc)
        vdist = np.linalg.norm(ground_truth.vertices - candidate.vertices, axis=1)
        vb = ground_truth.volume()
        va = candidate.volume()
        feat = candidate.dihedral_feature_edges(feature_threshold_deg)
        return MetricsReport(
            mean_angular_error_deg=float(errs.mean()) if len(errs) else 0.0,
            max_angular_error_deg=float(errs.max()) if len(errs) else 0.0,
            mean_vertex_distance=float(vdist.mean()) if len(vdist) else 0.0,
            volume_before=vb,
            volume_after=va,
            relative_volume_change=(va - vb) / vb if vb else 0.0,
            feature_edge_count=int(len(feat)),
            warnings=dict(warnings or {}),
        )
    if isinstance(ground_truth, PointCloud):
        if len(ground_truth) != len(candidate):
            raise ValueError("clouds must share cardinality")
        if ground_truth.normals is not None and candidate.normals is not None:
            errs = angular_errors_deg(ground_truth.normals, candidate.normals)
        else:
            errs = np.zeros(0)
        vdist = np.linalg.norm(ground_truth.points - candidate.points, axis=1)
        return MetricsReport(
            mean_angular_error_deg=float(errs.mean()) if len(errs) else 0.0,
            max_angular_error_deg=float(errs.max()) if len(errs) else 0.0,
            mean_vertex_distance=float(vdist.mean()) if len(vdist) else 0.0,
            volume_before=0.0,
            volume_after=0.0,
            relative_volume_change=0.0,
            feature_edge_count=0,
            warnings=dict(warnings or {}),
        )
    raise TypeError(type(ground_truth).__name__)
