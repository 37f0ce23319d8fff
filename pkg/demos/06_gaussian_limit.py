"""At large levels the rescaled occupation field turns into the free field.

The occupation field has mean u and variance 2u g(x,x), so field/u
concentrates at 1 while (field - u)/sqrt(2u) keeps unit-scale Gaussian
fluctuations with exactly the Green covariance.  The battery below runs an
increasing level schedule, checks the concentration laws, then compares
the standardized field at the top level against freshly drawn Gaussian
samples by per-coordinate KS tests.
"""

import numpy as np

from interlacements import (
    asymptotics_test,
    build_window,
    collapse,
    lattice,
    simulate_collapse_batch,
)

window = build_window(lattice(3), (0, 0, 0), 2)
origin = window.index[(0, 0, 0)]

print("concentration of field/u at the origin:")
for u in (1.0, 10.0, 100.0):
    batch = simulate_collapse_batch(collapse(window), u, 3000, seed=int(u))
    scaled = batch.samples[:, origin] / u
    print(f"  u = {u:5.0f}: mean {scaled.mean():.4f}, sd {scaled.std():.4f}")

print("\nfull battery with the KS comparison at the top level:\n")
report = asymptotics_test(window, u_schedule=(1.0, 10.0, 50.0, 200.0), count=3000, seed=77)
print(report.summary())
