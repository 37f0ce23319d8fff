"""Draw occupation fields three independent ways and compare their moments.

The collapse sampler runs one finite chain and clips its local time at the
star.  The excursion soup draws a Poisson number of killed excursions from
the boundary.  The hitting soup only records trajectories that touch a
chosen target set, which is all that matters for functionals supported
there.  All three must reproduce the exact first and second moments: mean
u at every vertex, covariance twice u times the Green matrix.
"""

import numpy as np

from interlacements import (
    build_window,
    collapse,
    green_killed,
    interlacement_set,
    lattice,
    sample_excursion_soup_batch,
    sample_hitting_soup_batch,
    simulate_collapse_batch,
)

window = build_window(lattice(3), (0, 0, 0), 2)
green = green_killed(window)
u, count = 1.0, 30_000
origin = window.index[(0, 0, 0)]
nbr = window.index[(1, 0, 0)]

col = simulate_collapse_batch(collapse(window), u, count, seed=5)
exc = sample_excursion_soup_batch(window, u, count, seed=6)
hit = sample_hitting_soup_batch([(0, 0, 0), (1, 0, 0)], window, u, count, seed=7)

print(f"level u = {u}, {count} samples per sampler\n")
print("sampler          mean(origin)   cov(origin, nbr)   exact mean   exact cov")
exact_cov = 2 * u * green.values[origin, nbr]
for batch in (col, exc, hit):
    m = batch.samples[:, origin].mean()
    c = np.cov(batch.samples[:, origin], batch.samples[:, nbr])[0, 1]
    print(f"{batch.sampler:<16} {m:12.4f}   {c:16.4f}   {u:10.4f}   {exact_cov:9.4f}")

# trajectory counts are exactly Poisson: mean u * boundary weight for the
# soup, u * capacity for the hitting version
print(f"\nexcursion counts: mean {exc.counts.mean():.2f}, "
      f"variance {exc.counts.var():.2f}, "
      f"Poisson rate {u * window.total_boundary_weight():.2f}")

# one surviving field and its trace: which vertices were touched at all
field = col.field(0)
touched = interlacement_set(field)
print(f"\nsample 0 touched {len(touched)} of {window.n} vertices at level {u}")

low = simulate_collapse_batch(collapse(window), 0.05, 1, seed=9).field(0)
print(f"at level 0.05 a single draw touched {len(interlacement_set(low))} vertices")
