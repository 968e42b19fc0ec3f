"""The two ground-truth problems and their gating behavior.

Both testbeds hide later objectives behind earlier ones: a point must
clear each threshold before the next measurement exists at all.  This
script evaluates a few inputs on each problem and prints what a
campaign would actually get back.
"""

import numpy as np

from orderedbo import TESTBED_NAMES, branin_currin, get_testbed, penicillin_simulate

print(f"registered testbeds: {', '.join(TESTBED_NAMES)}")

bc = get_testbed("branin-currin")
print(f"\n{bc.name}: {bc.n_dims} inputs, {bc.n_objectives} objectives, "
      f"edges {bc.dag_edges}, thresholds {bc.thresholds}")

print("raw function values at three points of the unit square:")
for u in ([0.1, 0.1], [0.5, 0.2], [0.9, 0.9]):
    f1, f2 = branin_currin(u)
    print(f"  u = {u}  branin {f1:8.3f}  currin {f2:7.3f}")

rng = np.random.default_rng(2)
X = rng.random((6, 2))
obs = bc.evaluate_noiseless_batch(X)
print("\ngated observations (objective 1 exists only when 0 passes):")
for o in obs:
    meas = "".join("y" if m else "-" for m in o.measured)
    print(f"  values {np.round(o.values, 3)}  measured {meas}")

pen = get_testbed("penicillin")
print(f"\n{pen.name}: {pen.n_dims} inputs, {pen.n_objectives} objectives, "
      f"edges {pen.dag_edges}")
print(f"thresholds {pen.thresholds}")

mid = 0.5 * (pen.bounds_lo + pen.bounds_hi)
yld, dur, co2 = penicillin_simulate(mid)
print(f"\nraw simulator at the center of the box: yield {yld:.3f} g/L, "
      f"duration {dur:.1f} h, CO2 {co2:.3f} g/L")

Xp = pen.bounds_lo + rng.random((5, 7)) * (pen.bounds_hi - pen.bounds_lo)
print("\nfive random fermentation settings through the gates:")
for o in pen.evaluate_noiseless_batch(Xp):
    meas = "".join("y" if m else "-" for m in o.measured)
    print(f"  values {np.round(o.values, 3)}  measured {meas}")
