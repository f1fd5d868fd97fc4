"""A convolutional network that is *exactly* a Born/Stay rule.

One integer kernel encodes (neighbor count, center state) into a single
code q = count + (max_count+1) * center — injective, so no information is
lost.  For every code in the rule's alive set, three ReLU units form a
triangle r(q-m+1) - 2 r(q-m) + r(q-m-1) that fires 1 exactly at q == m.
Their sum is the next cell state.  No training, no tolerance: the network
IS the rule.
"""

import numpy as np

from calab import build_constructed_net, forward, parse_notation, sample_rules, step

gol = parse_notation("B3/S23")
net = build_constructed_net(gol)
print("kernel:\n", net.code_kernel)
print("alive codes:", net.alive_codes)  # born 3 -> 3; stay 2,3 -> 11,12

# exact agreement with the engine on random grids
rng = np.random.default_rng(1)
grids = (rng.random((500, 32, 32)) < 0.5).astype(np.uint8)
print("forward == step on 500 random grids:",
      np.array_equal(forward(net, grids), step(gol, grids)))

# and not just for Life: any rule, any neighborhood size
for radius in (2, 3):
    rule = sample_rules(1, radius, rng_seed=radius)[0]
    n = build_constructed_net(rule)
    g = (rng.random((50, 24, 24)) < 0.5).astype(np.uint8)
    exact = np.array_equal(forward(n, g), step(rule, g))
    print(f"radius {radius} rule ({len(n.alive_codes)} codes, "
          f"{3 * len(n.alive_codes)} triangle units): exact = {exact}")

# the triangle units are hard indicator functions on integer inputs
from calab.predictors import triangle_response

q = np.arange(0, 18)
print("\ntriangle unit for code 11 over q = 0..17:")
print(" ", triangle_response(q, 11).tolist())
