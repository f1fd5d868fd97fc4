"""Classic patterns under B3/S23, and the two interchangeable engines.

`step` is the easy-to-audit numpy reference; `step_packed` squeezes 64
cells into each machine word and counts neighbors with bit-sliced adders.
They agree bit-for-bit, so you pick purely on speed.
"""

import time

import numpy as np

from calab import parse_notation, simulate, step, step_packed

gol = parse_notation("B3/S23")


def show(grid, title):
    print(title)
    for row in grid:
        print("  " + "".join("#" if c else "." for c in row))


# a blinker oscillates with period 2
blinker = np.zeros((5, 5), dtype=np.uint8)
blinker[2, 1:4] = 1
traj = simulate(gol, blinker, 2)
show(traj.states[0], "blinker t=0")
show(traj.states[1], "blinker t=1")
assert np.array_equal(traj.states[2], blinker)

# a glider on a torus comes back after 64 steps (16 cycles of (+1,+1))
glider = np.zeros((16, 16), dtype=np.uint8)
glider[1, 2] = glider[2, 3] = glider[3, 1] = glider[3, 2] = glider[3, 3] = 1
traj = simulate(gol, glider, 64, boundary="toroidal")
print("glider returns home after 64 toroidal steps:",
      np.array_equal(traj.states[64], glider))

# same contract, very different speed on big grids
big = (np.random.default_rng(0).random((1024, 1024)) < 0.5).astype(np.uint8)
for name, fn in (("naive", step), ("packed", step_packed)):
    t0 = time.perf_counter()
    out = fn(gol, big)
    dt = time.perf_counter() - t0
    print(f"{name:>6}: {big.size / dt / 1e6:8.1f} M cell updates/s")
assert np.array_equal(step(gol, big), step_packed(gol, big))
