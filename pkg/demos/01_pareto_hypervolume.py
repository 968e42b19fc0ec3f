"""Pareto fronts and hypervolume: exact sweep vs Monte Carlo.

Builds a small two-objective front, measures the dominated region
exactly, cross-checks with a sampling estimate, and shows how the
hypervolume improvement of a candidate point is computed.
"""

import numpy as np

from orderedbo import hvi, hypervolume, hypervolume_mc, pareto_front

rng = np.random.default_rng(0)

# points scattered below a trade-off curve, so no single point wins
theta = rng.uniform(0.0, np.pi / 2.0, 30)
radius = 8.0 * rng.uniform(0.6, 1.0, 30)
points = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
archive = pareto_front(points, reference=np.zeros(2))
print(f"30 random points reduce to a front of {len(archive.points)}:")
for p in archive.points:
    print(f"  ({p[0]:6.3f}, {p[1]:6.3f})")

exact = hypervolume(archive)
mc = hypervolume_mc(archive, n_samples=200_000, seed=1)
print(f"\nexact hypervolume   {exact:.4f}")
print(f"mc estimate         {mc.estimate:.4f} +- {mc.standard_error:.4f}")

# A candidate beyond the front adds volume; a dominated one adds none.
strong = archive.points.max(axis=0) + 1.0
weak = archive.points.min(axis=0) * 0.5
print(f"\nhvi of {strong}: {hvi(strong, archive):.4f}")
print(f"hvi of {weak}: {hvi(weak, archive):.4f}")
