"""How the objective DAG rewrites posterior samples.

A chain 0 -> 1 -> 2 says objective 1 only matters where objective 0
succeeded, and 2 only where 1 did.  The resampling transform zeroes
every coordinate whose own binary draw or any ancestor's draw failed,
so downstream optimism can never leak past a failed gate.
"""

import numpy as np

from orderedbo import JointPosteriorDraw, build_dag, gated_betas, resample

dag = build_dag(3, [(0, 1), (1, 2)])
print(f"chain over 3 objectives, edges {dag.edges}")
print(f"ancestors per objective: {[sorted(a) for a in dag.predecessors]}")

# Every 0/1 combination of gate outcomes for a single point.
beta = np.array([[b0, b1, b2]
                 for b0 in (0.0, 1.0)
                 for b1 in (0.0, 1.0)
                 for b2 in (0.0, 1.0)])
gated = gated_betas(dag, beta)
print("\nraw gates  -> effective gates")
for raw, eff in zip(beta, gated):
    print(f"  {raw.astype(int)}  ->  {eff.astype(int)}")

rho = np.full((1, beta.shape[0], 3), 2.5)
draw = JointPosteriorDraw(beta=beta[None, :, :], rho=rho)
gamma = resample(dag, draw)[0]
print("\nall magnitudes were 2.5; after the transform:")
for raw, row in zip(beta, gamma):
    print(f"  gates {raw.astype(int)}  values {row}")

# Idempotence: gated samples pass through unchanged.
again = resample(dag, JointPosteriorDraw(beta=gated[None], rho=gamma[None]))
assert np.array_equal(again[0], gamma)
print("\nre-applying the transform changes nothing (idempotent)")

empty = build_dag(3, [])
plain = resample(empty, draw)[0]
print("with no edges only each objective's own gate applies:")
print(f"  row for gates [0 1 1]: {plain[3]}")
