"""Stage 2 of two-stage denoising: move vertices to agree with filtered
face normals, plus the uniform-Laplacian baseline used for the shrinkage
comparison."""

from __future__ import annotations

import numpy as np

from .meshcore import NonManifoldError, TriMesh


def update_vertices(mesh: TriMesh, filtered_normals, iterations: int,
                    step: float = 1.0) -> np.ndarray:
    """Iteratively project vertices toward edge-face orthogonality.

    Per iteration each vertex moves by the average, over its incident
    faces, of the filtered normal scaled by the point-to-face-plane offset.
    Centroids are taken from the previous buffer within an iteration.
    """
    if not (0.0 <= step <= 1.0):
        raise ValueError("step must be in [0, 1]")
    bad = [i for i, fs in enumerate(mesh.edge_faces) if len(fs) > 2]
    if bad:
        raise NonManifoldError(f"non-manifold edges: {bad[:10]}")
    n = np.asarray(filtered_normals, dtype=float)
    v = mesh.vertices.copy()
    faces = mesh.faces
    deg = np.zeros(len(v))
    np.add.at(deg, faces.ravel(), 1.0)
    for _ in range(iterations):
        centroids = (v[faces[:, 0]] + v[faces[:, 1]] + v[faces[:, 2]]) / 3.0
        disp = np.zeros_like(v)
        for corner in range(3):
            vid = faces[:, corner]
            offset = np.einsum("ij,ij->i", n, centroids - v[vid])
            np.add.at(disp, vid, offset[:, None] * n)
        with np.errstate(invalid="ignore"):
            v = v + step * disp / np.maximum(deg, 1.0)[:, None]
    return v


def orthogonality_residual(vertices, faces, normals) -> float:
    """Sum of squared normal-offsets of vertices from incident-face centroids."""
    v = np.asarray(vertices, dtype=float)
    n = np.asarray(normals, dtype=float)
    centroids = (v[faces[:, 0]] + v[faces[:, 1]] + v[faces[:, 2]]) / 3.0
    total = 0.0
    for corner in range(3):
        vid = faces[:, corner]
        offset = np.einsum("ij,ij->i", n, centroids - v[vid])
        total += float(np.sum(offset * offset))
    return total


def laplacian_smooth(mesh: TriMesh, iterations: int, lam: float) -> np.ndarray:
    """Uniform-Laplacian (umbrella) smoothing: p += lam * (ring mean - p)."""
    if not (0.0 <= lam < 1.0):
        raise ValueError("lambda must be in [0, 1)")
    v = mesh.vertices.copy()
    rings = mesh.vertex_ring
    for _ in range(iterations):
        new = v.copy()
        for i, ring in enumerate(rings):
            if len(ring):
                new[i] = v[i] + lam * (v[ring].mean(axis=0) - v[i])
        v = new
    return v
