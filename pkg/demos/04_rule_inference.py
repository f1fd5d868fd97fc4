"""Watch a CA run and read its rule back off the trajectories.

Every observed cell transition votes on one (center state, neighbor
count) column.  Consistent votes pin the column down; conflicting votes
prove no single Born/Stay rule generated the data.
"""

import numpy as np

from calab import (
    TransitionEvidence,
    infer_rule,
    infer_smallest_radius,
    sample_rules,
    simulate,
    step,
)
from calab.inference import InconsistencyError

rng = np.random.default_rng(42)
secret = sample_rules(1, 2, rng_seed=2024)[0]
print("secret rule:   ", secret.notation)

evidence = TransitionEvidence(radius=2)
for _ in range(30):
    initial = (rng.random((32, 32)) < 0.5).astype(np.uint8)
    traj = simulate(secret, initial, 10)
    for t in range(traj.steps):
        evidence.observe(traj.states[t], traj.states[t + 1])

rule, report = infer_rule(evidence)
print("inferred rule: ", rule.notation)
print(report.describe())
print("recovered exactly:", rule == secret)

# the radius does not have to be known: try 1, 2, ... until consistent
pairs = []
for _ in range(10):
    g = (rng.random((24, 24)) < 0.5).astype(np.uint8)
    pairs.append((g, step(secret, g)))
_, _, found_radius = infer_smallest_radius(pairs)
print("smallest consistent radius:", found_radius)

# mixing two different rules' data is detected, not averaged away
other = sample_rules(1, 2, rng_seed=77)[0]
mixed = TransitionEvidence(radius=2)
for rule_ in (secret, other):
    g = (rng.random((24, 24)) < 0.5).astype(np.uint8)
    mixed.observe(g, step(rule_, g))
try:
    infer_rule(mixed)
    print("mixed data slipped through (possible but unlikely)")
except InconsistencyError as e:
    print("mixed data rejected:", str(e)[:72], "...")
