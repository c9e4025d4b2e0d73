"""Triangle mesh container, OBJ/PLY IO and derived quantities.

The mesh stores vertices and faces as numpy arrays and caches per-face
normals, centroids and areas plus vertex/face adjacency. Caches are rebuilt
explicitly via :meth:`TriMesh.recompute_face_fields` after vertex edits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class MeshError(Exception):
    pass


class ParseError(MeshError):
    pass


class DegenerateFaceError(MeshError):
    pass


class NonManifoldError(MeshError):
    pass


@dataclass(frozen=True)
class NeighborhoodSpec:
    """Which faces count as neighbors of a face.

    mode: "shared_vertex", "shared_edge" or "radius" (centroid Euclidean
    distance <= radius). include_self controls whether the face itself is in
    its own neighborhood.
    """

    mode: str = "shared_vertex"
    radius: float | None = None
    include_self: bool = True

    def __post_init__(self):
        if self.mode not in ("shared_vertex", "shared_edge", "radius"):
            raise ValueError(f"unknown neighborhood mode {self.mode!r}")
        if self.mode == "radius" and not (self.radius and self.radius > 0):
            raise ValueError("radius mode needs a positive radius")


class TriMesh:
    def __init__(self, vertices, faces, validate: bool = True):
        self.vertices = np.asarray(vertices, dtype=float).reshape(-1, 3)
        self.faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
        if validate and len(self.faces):
            if self.faces.min() < 0 or self.faces.max() >= len(self.vertices):
                raise MeshError("face index out of range")
        self._build_topology()
        self.recompute_face_fields(validate=validate)

    # ------------------------------------------------------------------
    # topology (depends on faces only)

    def _build_topology(self):
        nf = len(self.faces)
        nv = len(self.vertices)

        # unique undirected edges and the faces on each
        if nf:
            e = np.concatenate([self.faces[:, [0, 1]],
                                self.faces[:, [1, 2]],
                                self.faces[:, [2, 0]]])
            e_sorted = np.sort(e, axis=1)
            self.edges, inv = np.unique(e_sorted, axis=0, return_inverse=True)
            face_of_halfedge = np.tile(np.arange(nf), 3)
            edge_faces = [[] for _ in range(len(self.edges))]
            for he, f in zip(inv, face_of_halfedge):
                edge_faces[he].append(int(f))
            self.edge_faces = [sorted(fs) for fs in edge_faces]
        else:
            self.edges = np.zeros((0, 2), dtype=np.int64)
            self.edge_faces = []

        # vertex -> incident faces
        vf = [[] for _ in range(nv)]
        for f, (a, b, c) in enumerate(self.faces):
            vf[a].append(f)
            vf[b].append(f)
            vf[c].append(f)
        self.vertex_faces = [np.array(sorted(fs), dtype=np.int64) for fs in vf]

        # vertex -> one-ring vertices
        vv = [set() for _ in range(nv)]
        for a, b in self.edges:
            vv[a].add(int(b))
            vv[b].add(int(a))
        self.vertex_ring = [np.array(sorted(s), dtype=np.int64) for s in vv]

        # face -> faces sharing an edge / sharing a vertex
        adj_edge = [set() for _ in range(nf)]
        for fs in self.edge_faces:
            for i in fs:
                for j in fs:
                    if i != j:
                        adj_edge[i].add(j)
        self.face_adjacency_edge = [np.array(sorted(s), dtype=np.int64) for s in adj_edge]

        adj_vert = [set() for _ in range(nf)]
        for f, (a, b, c) in enumerate(self.faces):
            for v in (a, b, c):
                adj_vert[f].update(int(g) for g in vf[v])
            adj_vert[f].discard(f)
        self.face_adjacency_vertex = [np.array(sorted(s), dtype=np.int64) for s in adj_vert]

    # ------------------------------------------------------------------
    # geometry caches (depend on vertices)

    def recompute_face_fields(self, validate: bool = True):
        """Rebuild normals/centroids/areas/edge length after a vertex edit."""
        v = self.vertices
        f = self.faces
        if len(f):
            p0, p1, p2 = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
            cross = np.cross(p1 - p0, p2 - p0)
            double_area = np.linalg.norm(cross, axis=1)
            self.face_areas = 0.5 * double_area
            self.face_centroids = (p0 + p1 + p2) / 3.0
            if len(self.edges):
                d = v[self.edges[:, 0]] - v[self.edges[:, 1]]
                self.avg_edge_length = float(np.mean(np.linalg.norm(d, axis=1)))
            else:
                self.avg_edge_length = 0.0
            if validate:
                bad = np.flatnonzero(self.face_areas < 1e-14 * max(self.avg_edge_length, 1e-300) ** 2)
                if len(bad):
                    raise DegenerateFaceError(f"degenerate faces: {bad.tolist()}")
            with np.errstate(invalid="ignore", divide="ignore"):
                self.face_normals = cross / np.where(double_area > 0, double_area, 1.0)[:, None]
        else:
            self.face_areas = np.zeros(0)
            self.face_centroids = np.zeros((0, 3))
            self.face_normals = np.zeros((0, 3))
            self.avg_edge_length = 0.0

    # ------------------------------------------------------------------
    # queries

    def face_neighbors(self, face_index: int, spec: NeighborhoodSpec) -> np.ndarray:
        """Sorted neighbor faces of ``face_index`` per the spec."""
        if not (0 <= face_index < len(self.faces)):
            raise IndexError(face_index)
        if spec.mode == "shared_edge":
            nbrs = self.face_adjacency_edge[face_index]
        elif spec.mode == "shared_vertex":
            nbrs = self.face_adjacency_vertex[face_index]
        else:
            c = self.face_centroids[face_index]
            d = np.linalg.norm(self.face_centroids - c, axis=1)
            nbrs = np.flatnonzero(d <= spec.radius)
            nbrs = nbrs[nbrs != face_index]
        if spec.include_self:
            nbrs = np.sort(np.append(nbrs, face_index))
        return np.asarray(nbrs, dtype=np.int64)

    def neighbor_lists(self, spec: NeighborhoodSpec) -> list[np.ndarray]:
        return [self.face_neighbors(i, spec) for i in range(len(self.faces))]

    def is_edge_manifold(self) -> bool:
        return all(len(fs) <= 2 for fs in self.edge_faces)

    def vertex_mean_curvature(self) -> np.ndarray:
        """Cotangent mean-curvature magnitude per vertex (0 on the boundary)."""
        bad = [i for i, fs in enumerate(self.edge_faces) if len(fs) > 2]
        if bad:
            raise NonManifoldError(f"non-manifold edges: {bad[:10]}")
        nv = len(self.vertices)
        acc = np.zeros((nv, 3))
        ring_area = np.zeros(nv)
        boundary = np.zeros(nv, dtype=bool)
        for e, fs in zip(self.edges, self.edge_faces):
            if len(fs) < 2:
                boundary[e[0]] = boundary[e[1]] = True

        v = self.vertices
        for f, (a, b, c) in enumerate(self.faces):
            pa, pb, pc = v[a], v[b], v[c]
            area = self.face_areas[f]
            ring_area[[a, b, c]] += area
            # cotangent at each corner weights the opposite edge
            for (i, j, k) in ((a, b, c), (b, c, a), (c, a, b)):
                u = v[j] - v[i]
                w = v[k] - v[i]
                cot = np.dot(u, w) / max(np.linalg.norm(np.cross(u, w)), 1e-300)
                # corner i faces edge (j, k); contributes to both endpoints
                acc[j] += cot * (v[k] - v[j])
                acc[k] += cot * (v[j] - v[k])
        kappa = np.linalg.norm(acc, axis=1) / np.maximum(4.0 * ring_area / 3.0, 1e-300)
        kappa[boundary] = 0.0
        kappa[ring_area == 0] = 0.0
        return kappa

    def dihedral_feature_edges(self, threshold_degrees: float) -> np.ndarray:
        """Edges whose adjacent-face normal angle >= threshold (interior only)."""
        out = []
        thr = math.radians(threshold_degrees)
        for e, fs in zip(self.edges, self.edge_faces):
            if len(fs) == 2:
                n0, n1 = self.face_normals[fs[0]], self.face_normals[fs[1]]
                ang = math.acos(min(1.0, max(-1.0, float(np.dot(n0, n1)))))
                if ang >= thr:
                    out.append(e)
        return np.array(out, dtype=np.int64).reshape(-1, 2)

    def volume(self) -> float:
        """Signed volume; meaningful for closed orientable meshes."""
        v = self.vertices
        f = self.faces
        if not len(f):
            return 0.0
        return float(np.einsum("ij,ij->i", v[f[:, 0]],
                               np.cross(v[f[:, 1]], v[f[:, 2]])).sum() / 6.0)

    def copy(self) -> "TriMesh":
        return TriMesh(self.vertices.copy(), self.faces.copy(), validate=False)


def convert_normal_args(value: float, kind: str) -> tuple[float, float, float]:
    """Return (euclidean distance, angle, arccos-dot) from any one of them.

    kind: "distance" (||n_i - n_j|| in [0, 2]), "angle" or "arccos_dot"
    (both radians in [0, pi]). For unit normals angle == arccos-dot.
    """
    if kind == "distance":
        if not (0.0 <= value <= 2.0):
            raise ValueError(f"normal distance must be in [0, 2], got {value}")
        angle = math.acos(min(1.0, max(-1.0, 1.0 - value * value / 2.0)))
    elif kind in ("angle", "arccos_dot"):
        if not (0.0 <= value <= math.pi):
            raise ValueError(f"angle must be in [0, pi], got {value}")
        angle = value
    else:
        raise ValueError(f"unknown representation {kind!r}")
    distance = math.sqrt(max(0.0, 2.0 - 2.0 * math.cos(angle)))
    return distance, angle, angle


# ----------------------------------------------------------------------
# file IO

def load_mesh(path) -> TriMesh:
    """Load an ASCII OBJ (v/f) or ASCII PLY triangle mesh."""
    text = open(path, "r", encoding="utf-8", errors="replace").read()
    if text.lstrip().startswith("ply"):
        return _load_ply(text)
    return _load_obj(text)


def _load_obj(text: str) -> TriMesh:
    vertices = []
    faces = []
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise ParseError(f"line {ln}: vertex with <3 coordinates")
            try:
                vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
            except ValueError:
                raise ParseError(f"line {ln}: bad vertex coordinate")
        elif tag == "f":
            if len(parts) < 4:
                raise ParseError(f"line {ln}: face with <3 vertices")
            try:
                idx = [int(p.split("/")[0]) for p in parts[1:]]
            except ValueError:
                raise ParseError(f"line {ln}: bad face index")
            idx = [i - 1 if i > 0 else len(vertices) + i for i in idx]
            for a, b in zip(idx[1:-1], idx[2:]):  # fan-triangulate
                faces.append([idx[0], a, b])
        # other records (vn, vt, o, g, s, mtllib, usemtl) are ignored
    return TriMesh(np.array(vertices, dtype=float).reshape(-1, 3),
                   np.array(faces, dtype=np.int64).reshape(-1, 3))


def _load_ply(text: str) -> TriMesh:
    lines = text.splitlines()
    i = 0
    n_vertex = n_face = 0
    vertex_props = []
    in_header = True
    current_element = None
    while i < len(lines):
        line = lines[i].strip()
        i += 1
        if not in_header:
            break
        if line.startswith("format"):
            if "ascii" not in line:
                raise ParseError("only ASCII PLY is supported")
        elif line.startswith("element vertex"):
            n_vertex = int(line.split()[2])
            current_element = "vertex"
        elif line.startswith("element face"):
            n_face = int(line.split()[2])
            current_element = "face"
        elif line.startswith("property") and current_element == "vertex":
            vertex_props.append(line.split()[-1])
        elif line == "end_header":
            in_header = False
            break
    if in_header:
        raise ParseError("PLY header without end_header")
    body = [ln.strip() for ln in lines[i:] if ln.strip()]
    try:
        xi, yi, zi = (vertex_props.index(p) for p in ("x", "y", "z"))
    except ValueError:
        raise ParseError("PLY vertex element lacks x/y/z properties")
    vertices = []
    for ln in body[:n_vertex]:
        parts = ln.split()
        vertices.append([float(parts[xi]), float(parts[yi]), float(parts[zi])])
    faces = []
    for ln in body[n_vertex:n_vertex + n_face]:
        parts = ln.split()
        cnt = int(parts[0])
        if cnt < 3:
            raise ParseError("face with <3 vertices")
        idx = [int(p) for p in parts[1:1 + cnt]]
        for a, b in zip(idx[1:-1], idx[2:]):
            faces.append([idx[0], a, b])
    if len(vertices) != n_vertex:
        raise ParseError("PLY vertex count mismatch")
    return TriMesh(np.array(vertices, dtype=float).reshape(-1, 3),
                   np.array(faces, dtype=np.int64).reshape(-1, 3))


def save_mesh(mesh: TriMesh, path) -> None:
    """Write ASCII OBJ with 9 significant digits and 1-based faces."""
    with open(path, "w", encoding="utf-8") as fh:
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for f in mesh.faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")
