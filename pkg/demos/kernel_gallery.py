"""Tabulate every robust kernel and print a side-by-side weight comparison.

Writes one CSV per kernel into demos/out/kernels/ (columns x,rho,psi,g) and
prints the weight each kernel assigns to a small, a moderate, and a large
residual.  The interesting column is the last one: quadratic and Huber
kernels keep giving large residuals real influence, the redescending family
(Gaussian, Tukey, truncated quadratic) shuts them out entirely.
"""

from pathlib import Path

import numpy as np

from denoisekit import KERNEL_KINDS, Kernel, sample_table, samples_to_csv

OUT = Path(__file__).parent / "out" / "kernels"
OUT.mkdir(parents=True, exist_ok=True)

probes = np.array([0.2, 1.0, 5.0])  # residuals in units of sigma

print(f"{'kernel':<18}" + "".join(f"g({x:g}s)".rjust(12) for x in probes))
for kind in KERNEL_KINDS:
    k = Kernel(kind, 1.0, box_floor=0.05 if kind == "box" else 0.0)
    w = k.weight(probes)
    # the pure-L1 kernels blow up at 0 and are substituted in the filters;
    # here we just show the raw values
    row = "".join(f"{v:12.4f}" if np.isfinite(v) else "         inf" for v in w)
    print(f"{kind:<18}{row}")

    samples = sample_table(k, x_max=4.0, n=400)
    path = OUT / f"{kind}.csv"
    path.write_text(samples_to_csv(samples))

print(f"\nwrote {len(KERNEL_KINDS)} tables to {OUT}/")
print("plot any of them with e.g.:")
print("  python3 -c \"import numpy, matplotlib.pyplot as p; "
      "d = numpy.genfromtxt('demos/out/kernels/tukey.csv', delimiter=',', "
      "names=True); p.plot(d['x'], d['g']); p.show()\"")
