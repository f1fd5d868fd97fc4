"""Grid evolution under Born/Stay rules.

Three neighbor-counting routes with one contract:

- ``neighbor_count``: per-cell definition, plain Python.  The semantic
  authority; used by tests, too slow for real grids.
- ``step``: numpy shift-and-add reference.  Simple enough to audit,
  cross-checked against ``neighbor_count``.
- ``step_packed``: 64 cells per uint64 word, neighbor counts in bit-sliced
  arithmetic.  Never trusted without the equivalence suite against ``step``.

Boundaries: "dead" treats all cells outside the grid as permanently dead,
"toroidal" wraps indices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rules import Rule

__all__ = [
    "BOUNDARIES",
    "Trajectory",
    "ensure_grid",
    "neighbor_count",
    "neighbor_counts",
    "step",
    "step_packed",
    "simulate",
]

BOUNDARIES = ("dead", "toroidal")

_U64 = np.uint64
_ALL_ONES = _U64(0xFFFFFFFFFFFFFFFF)


def _check_boundary(boundary: str):
    if boundary not in BOUNDARIES:
        raise ValueError(f"boundary must be one of {BOUNDARIES}, got {boundary!r}")


def ensure_grid(cells) -> np.ndarray:
    """Validate and return a binary uint8 grid (last two axes are H, W)."""
    grid = np.asarray(cells)
    if grid.ndim < 2 or grid.shape[-1] < 1 or grid.shape[-2] < 1:
        raise ValueError(f"grid must be at least 2-D with nonzero dims, got shape {grid.shape}")
    if grid.dtype != np.uint8:
        grid = grid.astype(np.uint8)
    if grid.size and grid.max() > 1:
        raise ValueError("grid cells must be 0 or 1")
    return grid


@dataclass
class Trajectory:
    """States of one simulation run; ``states[0]`` is the initial grid."""

    rule: Rule
    states: np.ndarray  # (T+1, H, W) uint8
    boundary: str

    @property
    def steps(self) -> int:
        return self.states.shape[0] - 1

    @property
    def height(self) -> int:
        return self.states.shape[1]

    @property
    def width(self) -> int:
        return self.states.shape[2]

    def __getitem__(self, t: int) -> np.ndarray:
        return self.states[t]


def neighbor_count(grid, row: int, col: int, radius: int, boundary: str = "dead") -> int:
    """Living cells in the Moore window around (row, col), center excluded.

    Per-cell prose definition.  With a toroidal boundary and a window larger
    than the grid, wrapped cells are counted once per window offset.
    """
    _check_boundary(boundary)
    grid = ensure_grid(grid)
    h, w = grid.shape
    if not (0 <= row < h and 0 <= col < w):
        raise ValueError(f"cell ({row}, {col}) outside {h}x{w} grid")
    total = 0
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            if dy == 0 and dx == 0:
                continue
            r, c = row + dy, col + dx
            if boundary == "toroidal":
                total += int(grid[r % h, c % w])
            elif 0 <= r < h and 0 <= c < w:
                total += int(grid[r, c])
    return total


def neighbor_counts(grid, radius: int, boundary: str = "dead") -> np.ndarray:
    """Neighbor counts for every cell at once (batch-friendly on leading axes)."""
    _check_boundary(boundary)
    grid = ensure_grid(grid)
    h, w = grid.shape[-2:]
    pad_spec = [(0, 0)] * (grid.ndim - 2) + [(radius, radius), (radius, radius)]
    mode = "wrap" if boundary == "toroidal" else "constant"
    padded = np.pad(grid, pad_spec, mode=mode).astype(np.int32)
    total = np.zeros(grid.shape, dtype=np.int32)
    for dy in range(2 * radius + 1):
        for dx in range(2 * radius + 1):
            total += padded[..., dy : dy + h, dx : dx + w]
    return total - grid


def step(rule: Rule, grid, boundary: str = "dead") -> np.ndarray:
    """One synchronous update: reference implementation.

    A dead cell becomes alive iff its count is in ``rule.born``; a live cell
    stays alive iff its count is in ``rule.stay``.  The input is not modified.
    """
    grid = ensure_grid(grid)
    counts = neighbor_counts(grid, rule.radius, boundary)
    born_next = np.isin(counts, sorted(rule.born))
    stay_next = np.isin(counts, sorted(rule.stay))
    return np.where(grid == 1, stay_next, born_next).astype(np.uint8)


# ---------------------------------------------------------------------------
# packed kernel: rows of uint64 words, bit c of word c//64 = column c


def _pack(grid: np.ndarray) -> np.ndarray:
    h, w = grid.shape
    n_words = (w + 63) // 64
    packed = np.packbits(grid, axis=1, bitorder="little")
    if packed.shape[1] < n_words * 8:
        packed = np.pad(packed, ((0, 0), (0, n_words * 8 - packed.shape[1])))
    return np.ascontiguousarray(packed).view("<u8")


def _unpack(words: np.ndarray, width: int) -> np.ndarray:
    packed = np.ascontiguousarray(words).view(np.uint8)
    return np.unpackbits(packed, axis=1, count=width, bitorder="little")


def _last_word_mask(width: int) -> np.uint64:
    rem = width % 64
    return _ALL_ONES if rem == 0 else _U64((1 << rem) - 1)


def _hshift(words: np.ndarray, d: int, last_mask: np.uint64) -> np.ndarray:
    """Value at column c becomes value at column c + d; vacated columns are 0."""
    if d == 0:
        return words
    res = np.zeros_like(words)
    if d > 0:
        res |= words >> _U64(d)
        res[:, :-1] |= words[:, 1:] << _U64(64 - d)
    else:
        res |= words << _U64(-d)
        res[:, 1:] |= words[:, :-1] >> _U64(64 + d)
    res[:, -1] &= last_mask  # keep padding bits dead
    return res


def _vshift(words: np.ndarray, d: int) -> np.ndarray:
    """Row i takes row i + d; rows shifted in from outside are 0."""
    if d == 0:
        return words
    res = np.zeros_like(words)
    if d > 0:
        res[:-d] = words[d:]
    else:
        res[-d:] = words[:d]
    return res


def _plane_add(a: list[np.ndarray], b: list[np.ndarray]) -> list[np.ndarray]:
    """Ripple-carry add of two bit-sliced numbers (lists of planes, LSB first)."""
    out = []
    carry = None
    for i in range(max(len(a), len(b))):
        x = a[i] if i < len(a) else None
        y = b[i] if i < len(b) else None
        if x is None:
            x, y = y, None
        if y is None and carry is None:
            out.append(x)
            continue
        if y is None:
            y = carry
            carry = None
        s = x ^ y
        c = x & y
        if carry is not None:
            c = c | (s & carry)
            s = s ^ carry
        out.append(s)
        carry = c if c.any() else None
    if carry is not None:
        out.append(carry)
    return out


def _plane_eq(planes: list[np.ndarray], value: int) -> np.ndarray:
    """Word-parallel mask of cells whose bit-sliced number equals `value`."""
    if value >> len(planes):
        return np.zeros_like(planes[0])
    mask = np.full_like(planes[0], _ALL_ONES)
    for i, plane in enumerate(planes):
        mask &= plane if (value >> i) & 1 else ~plane
    return mask


def _window_sums_radius1(cells: np.ndarray, last_mask: np.uint64) -> list[np.ndarray]:
    """3x3 window sums (center included) via explicit full adders."""
    left = _hshift(cells, -1, last_mask)
    right = _hshift(cells, 1, last_mask)
    # per-row triple l + m + r as a 2-bit number
    row_lo = left ^ cells ^ right
    row_hi = (left & cells) | (right & (left ^ cells))
    total = [row_lo, row_hi]
    for d in (-1, 1):
        total = _plane_add(total, [_vshift(row_lo, d), _vshift(row_hi, d)])
    return total


def _window_sums(cells: np.ndarray, radius: int, last_mask: np.uint64) -> list[np.ndarray]:
    """(2r+1)^2 window sums (center included): column sums, then row tiling."""
    if radius == 1:
        return _window_sums_radius1(cells, last_mask)
    col = [cells]
    for d in range(1, radius + 1):
        col = _plane_add(col, [_vshift(cells, d)])
        col = _plane_add(col, [_vshift(cells, -d)])
    total = col
    for d in range(1, radius + 1):
        for sign in (d, -d):
            total = _plane_add(total, [_hshift(p, sign, last_mask) for p in col])
    return total


def _step_packed_dead(rule: Rule, grid: np.ndarray) -> np.ndarray:
    h, w = grid.shape
    last_mask = _last_word_mask(w)
    cells = _pack(grid)
    sums = _window_sums(cells, rule.radius, last_mask)
    # window sum includes the center, so live cells match stay-count + 1
    eq_cache: dict[int, np.ndarray] = {}

    def union_mask(values) -> np.ndarray:
        mask = np.zeros_like(cells)
        for v in values:
            if v not in eq_cache:
                eq_cache[v] = _plane_eq(sums, v)
            mask |= eq_cache[v]
        return mask

    born_mask = union_mask(sorted(rule.born))
    stay_mask = union_mask(sorted(s + 1 for s in rule.stay))
    nxt = (~cells & born_mask) | (cells & stay_mask)
    nxt[:, -1] &= last_mask
    return _unpack(nxt, w)


def step_packed(rule: Rule, grid, boundary: str = "dead") -> np.ndarray:
    """One synchronous update: bit-packed kernel, same contract as ``step``."""
    _check_boundary(boundary)
    grid = ensure_grid(grid)
    if grid.ndim != 2:
        raise ValueError("step_packed operates on a single 2-D grid")
    if boundary == "toroidal":
        r = rule.radius
        wrapped = np.pad(grid, r, mode="wrap")
        return _step_packed_dead(rule, wrapped)[r : r + grid.shape[0], r : r + grid.shape[1]]
    return _step_packed_dead(rule, grid)


def simulate(rule: Rule, initial, steps: int, boundary: str = "dead") -> Trajectory:
    """Evolve `initial` for `steps` updates; returns all steps+1 states.

    Uses the packed kernel, which is bit-exact with ``step``.
    """
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    _check_boundary(boundary)
    grid = ensure_grid(initial)
    states = np.empty((steps + 1,) + grid.shape, dtype=np.uint8)
    states[0] = grid
    for t in range(steps):
        states[t + 1] = step_packed(rule, states[t], boundary)
    return Trajectory(rule=rule, states=states, boundary=boundary)
