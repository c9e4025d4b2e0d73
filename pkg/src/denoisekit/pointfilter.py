"""Point-set normal filters and the normal-driven point position update."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import Kernel
from .pointcloud import PointCloud

POINT_METHODS = (
    "li_bilateral",
    "zheng_guided_pc",
    "digne_bilateral",
    "zheng_rolling",
    "yadav_vnvt",
)


@dataclass(frozen=True)
class PointFilterSpec:
    method: str
    sigma: float | str = "auto"       # "auto" only for li_bilateral
    sigma_d: float | str = "auto"
    k: int | None = 12                # kNN size; or use radius
    radius: float | None = None
    iterations: int = 1

    def __post_init__(self):
        if self.method not in POINT_METHODS:
            raise ValueError(f"unknown method {self.method!r}; valid: {POINT_METHODS}")
        if self.k is None and self.radius is None:
            raise ValueError("set k or radius")
        if self.sigma == "auto" and self.method not in ("li_bilateral", "digne_bilateral"):
            raise ValueError("sigma='auto' is only defined for li_bilateral/digne_bilateral")
        if not isinstance(self.sigma, str) and not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")

    # ---- flat key=value serialization (same format as FilterSpec) ----
    def to_text(self) -> str:
        lines = {
            "method": self.method,
            "sigma": str(self.sigma),
            "sigma_d": str(self.sigma_d),
            "k": "none" if self.k is None else str(self.k),
            "radius": "none" if self.radius is None else repr(self.radius),
            "iterations": str(self.iterations),
        }
        return "".join(f"{k}={v}\n" for k, v in lines.items())

    @classmethod
    def from_text(cls, text: str) -> "PointFilterSpec":
        kv = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            k, v = line.split("=", 1)
            kv[k.strip()] = v.strip()
        def num(v):
            return v if v == "auto" else float(v)
        k = kv.get("k", "none")
        r = kv.get("radius", "none")
        return cls(method=kv["method"],
                   sigma=num(kv.get("sigma", "auto")),
                   sigma_d=num(kv.get("sigma_d", "auto")),
                   k=None if k == "none" else int(k),
                   radius=None if r == "none" else float(r),
                   iterations=int(kv.get("iterations", 1)))


def _neighborhoods(cloud: PointCloud, spec) -> list[np.ndarray]:
    """Per-point neighbor indices including the point itself, ascending."""
    out = []
    for i in range(len(cloud)):
        if spec.radius is not None:
            idx = cloud.radius_neighbors(i, spec.radius, include_self=True)
        else:
            idx = np.sort(np.append(cloud.knn(i, min(spec.k, len(cloud) - 1)), i))
        out.append(idx)
    return out


def _gauss(x, sigma):
    return np.exp(-(x * x) / (sigma * sigma))


def filter_point_normals(cloud: PointCloud, spec: PointFilterSpec) -> np.ndarray:
    """Per-method weighted normal averaging, double-buffered across iterations."""
    if cloud.normals is None:
        raise ValueError("cloud has no normals; estimate them first")
    pts = cloud.points
    prev = cloud.normals.copy()
    nbrs = _neighborhoods(cloud, spec)

    # Li's auto sigma: std of the angular variation, from the initial normals
    sigma = spec.sigma
    if sigma == "auto":
        angs = []
        for i, idx in enumerate(nbrs):
            dots = np.clip(prev[idx] @ prev[i], -1.0, 1.0)
            angs.append(np.arccos(dots))
        sigma = float(np.std(np.concatenate(angs)))
        sigma = max(sigma, 1e-6)

    for _ in range(spec.iterations):
        guidance = None
        if spec.method == "zheng_guided_pc":
            guidance = _guidance_pc(cloud, prev, nbrs, spec)
        new = np.empty_like(prev)
        for i, idx in enumerate(nbrs):
            d = np.linalg.norm(pts[idx] - pts[i], axis=1)
            if spec.method == "li_bilateral":
                x = np.arccos(np.clip(prev[idx] @ prev[i], -1.0, 1.0))
                r = d.max() if d.max() > 0 else 1.0
                sd = spec.sigma_d if spec.sigma_d != "auto" else r / 2.0
                w = _gauss(x, sigma) * _gauss(d, sd)
            elif spec.method == "zheng_guided_pc":
                x = np.linalg.norm(guidance[idx] - guidance[i], axis=1)
                sd = _auto_sd(spec, d)
                w = _gauss(x, sigma) * _gauss(d, sd)
            elif spec.method == "zheng_rolling":
                x = np.linalg.norm(prev[idx] - prev[i], axis=1)
                sd = _auto_sd(spec, d)
                w = _gauss(x, sigma) * _gauss(d, sd)
            elif spec.method == "yadav_vnvt":
                x = np.arccos(np.clip(prev[idx] @ prev[i], -1.0, 1.0))
                w = Kernel("box", sigma, box_floor=0.0).weight(x)
            else:  # digne_bilateral smooths positions only; normals pass through
                new[i] = prev[i]
                continue
            acc = (w[:, None] * prev[idx]).sum(axis=0)
            nrm = np.linalg.norm(acc)
            new[i] = acc / nrm if nrm > 1e-12 else prev[i]
        prev = new
    return prev


def _auto_sd(spec, d):
    if spec.sigma_d != "auto":
        return spec.sigma_d
    pos = d[d > 0]
    return float(pos.mean()) if len(pos) else 1.0


def _guidance_pc(cloud, prev, nbrs, spec):
    """Distance-weighted mean normal per point (single-normal guidance)."""
    pts = cloud.points
    out = np.empty_like(prev)
    for i, idx in enumerate(nbrs):
        d = np.linalg.norm(pts[idx] - pts[i], axis=1)
        sd = _auto_sd(spec, d)
        w = _gauss(d, sd)
        acc = (w[:, None] * prev[idx]).sum(axis=0)
        nrm = np.linalg.norm(acc)
        out[i] = acc / nrm if nrm > 1e-12 else prev[i]
    return out


def default_radius(cloud: PointCloud) -> float:
    """Neighborhood-radius heuristic scaled by bounding-box size and density."""
    return cloud.bbox_diagonal * math.sqrt(20.0 / max(len(cloud), 1))


def update_point_positions(cloud: PointCloud, filtered_normals,
                           spec: PointFilterSpec | None = None,
                           radius: float | None = None,
                           iterations: int = 1) -> tuple[np.ndarray, int]:
    """Move each point along its filtered normal toward the local surface.

    The offset is the weighted mean of the plane-distances of neighbors,
    with a Gaussian spatial weight (sigma_d = r/3) and a Gaussian weight on
    the plane distance itself (sigma = r/3 by default, matching the
    equal-radii heuristic). Returns (new points, empty-neighborhood count).
    """
    n = np.asarray(filtered_normals, dtype=float)
    if spec is not None:
        iterations = spec.iterations
        if spec.radius is not None:
            radius = spec.radius
    if radius is None:
        radius = default_radius(cloud)
    sigma_d = radius / 3.0
    sigma = radius / 3.0
    pts = cloud.points.copy()
    warnings = 0
    for _ in range(iterations):
        snapshot = PointCloud(pts)
        new = pts.copy()
        for i in range(len(pts)):
            idx = snapshot.radius_neighbors(i, radius, include_self=True)
            idx = idx[idx != i]
            if len(idx) == 0:
                warnings += 1
                continue
            rel = pts[idx] - pts[i]
            d = np.linalg.norm(rel, axis=1)
            h = np.einsum("ij,j->i", rel, n[i])
            w = _gauss(d, sigma_d) * _gauss(np.abs(h), sigma)
            denom = w.sum()
            if denom <= 1e-300:
                warnings += 1
                continue
            new[i] = pts[i] + (np.dot(w, h) / denom) * n[i]
        pts = new
    return pts, warnings
