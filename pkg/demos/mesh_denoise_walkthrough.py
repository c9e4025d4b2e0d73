"""Two-stage mesh denoising, start to finish, on a synthetic cube.

Builds a densely tessellated cube, corrupts it with vertex noise, then runs
the two stages explicitly: iterative robust filtering of the face normals,
followed by vertex repositioning that makes the geometry agree with the
filtered normals.  Three filter flavors are compared against the noisy
baseline; the cube's sharp edges are what separates them, so the report
splits the angular error into feature-adjacent and overall.
"""

from pathlib import Path

import numpy as np

from denoisekit import (
    FilterSpec,
    add_noise,
    compare,
    denoise_mesh,
    make_cube,
    save_mesh,
)
from denoisekit.bench import angular_errors_deg

OUT = Path(__file__).parent / "out" / "mesh"
OUT.mkdir(parents=True, exist_ok=True)

truth = make_cube(10)
noisy = add_noise(truth, 0.3, seed=42)
save_mesh(truth, OUT / "ground_truth.obj")
save_mesh(noisy, OUT / "noisy.obj")

# faces touching a sharp dihedral edge of the clean cube
edge_map = dict(zip(map(tuple, truth.edges), truth.edge_faces))
feat = sorted({f for e in map(tuple, truth.dihedral_feature_edges(70.0))
               for f in edge_map[e]})

specs = {
    "isotropic-mean": FilterSpec.preset("yagou_mean", iterations=20),
    "bilateral": FilterSpec.preset("zheng_bilateral", sigma=0.35, iterations=20),
    "tukey-robust": FilterSpec.preset("yadav_tukey_2018", sigma=1.0, iterations=20),
}

base = angular_errors_deg(truth.face_normals, noisy.face_normals)
print(f"{'method':<16}{'mean err':>10}{'feature err':>13}{'volume drift':>14}")
print(f"{'(noisy)':<16}{base.mean():10.2f}{base[feat].mean():13.2f}{0.0:14.4f}")

for name, spec in specs.items():
    out, field = denoise_mesh(noisy, spec, vertex_iterations=30, step=1.0)
    errs = angular_errors_deg(truth.face_normals, out.face_normals)
    drift = abs(out.volume() - truth.volume()) / truth.volume()
    print(f"{name:<16}{errs.mean():10.2f}{errs[feat].mean():13.2f}{drift:14.4f}")
    save_mesh(out, OUT / f"{name}.obj")

print(f"\nmeshes written to {OUT}/ — the isotropic mean rounds the cube edges "
      "off, the robust kernels keep them")

r = compare(truth, noisy)
print(f"full metrics for the noisy baseline:\n{r.to_json()}")
