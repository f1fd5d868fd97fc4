"""Bit-exact file formats.

All multi-byte integers are little-endian.  Frames are stored as
FrameBlocks: the H*W cells row-major, packed 8 per byte MSB-first, final
byte zero-padded (same packing P4 bitmaps use per row).

- CADS (datasets): three blocks in fixed order train, val, test.  Block =
  magic "CADS" | version u8=1 | boundary u8 (0=dead, 1=toroidal) | k u8 |
  reserved u8 | H u32 | W u32 | rule_count u32 | per rule: notation length
  u16 + UTF-8 canonical notation | sample_count u64 | per sample:
  rule_id u32 + (k+1) FrameBlocks (k inputs oldest-first, then target).
  The train and val blocks carry the training rule table, the test block
  its own table; sample rule_ids index the block's table.
- CAPR (predictions): magic "CAPR" | version u8=1 | mode u8 (0 = binary
  FrameBlocks, 1 = float32 probabilities row-major) | H u32 | W u32 |
  count u64 | frames, in dataset split order.
- CATR (trajectories): magic "CATR" | version u8=1 | boundary u8 |
  reserved u16 | H u32 | W u32 | rule notation length u16 + UTF-8 |
  state_count u64 | FrameBlocks.
- Rules text: one canonical notation per line, '#' comments, blank lines
  ignored.

Writers go through a temp file and rename, so readers never see partial
files.
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass
from io import BytesIO

import numpy as np

from .dataset import Dataset, DatasetSpec, Sample
from .engine import Trajectory, ensure_grid
from .rules import Rule, RuleSet, format_notation, parse_notation

__all__ = [
    "FormatError",
    "TruncationError",
    "pack_frame",
    "unpack_frame",
    "write_dataset",
    "read_dataset",
    "dataset_to_bytes",
    "dataset_from_bytes",
    "Predictions",
    "write_predictions",
    "read_predictions",
    "write_trajectory",
    "read_trajectory",
    "write_rules_text",
    "read_rules_text",
    "render_pbm",
    "write_spec_config",
    "read_spec_config",
    "format_spec_config",
    "parse_spec_config",
]

_BOUNDARY_CODE = {"dead": 0, "toroidal": 1}
_BOUNDARY_NAME = {v: k for k, v in _BOUNDARY_CODE.items()}


class FormatError(ValueError):
    """File does not conform to its format."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class TruncationError(FormatError):
    """File ends before a declared field; `offset` is where reading stopped."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"truncated file: {message}", offset)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncationError(f"expected {n} bytes for {what}", self.pos)
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str, what: str):
        size = struct.calcsize(fmt)
        return struct.unpack(fmt, self.take(size, what))

    def u8(self, what: str) -> int:
        return self.unpack("<B", what)[0]

    def u16(self, what: str) -> int:
        return self.unpack("<H", what)[0]

    def u32(self, what: str) -> int:
        return self.unpack("<I", what)[0]

    def u64(self, what: str) -> int:
        return self.unpack("<Q", what)[0]

    def expect_magic(self, magic: bytes):
        at = self.pos
        got = self.take(len(magic), f"{magic.decode()} magic")
        if got != magic:
            raise FormatError(f"bad magic {got!r} at offset {at}, expected {magic!r}")

    def expect_version(self, version: int, what: str):
        got = self.u8(f"{what} version")
        if got != version:
            raise FormatError(f"unsupported {what} version {got}, expected {version}")

    def expect_eof(self, what: str):
        if self.pos != len(self.data):
            raise FormatError(
                f"{len(self.data) - self.pos} trailing bytes after {what} at offset {self.pos}"
            )


def _atomic_write(path, data: bytes):
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=os.path.basename(path) + ".")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _frame_nbytes(height: int, width: int) -> int:
    return (height * width + 7) // 8


def pack_frame(grid) -> bytes:
    """Grid -> FrameBlock payload (row-major bits, MSB first, zero-padded)."""
    grid = ensure_grid(grid)
    return np.packbits(grid.ravel(), bitorder="big").tobytes()


def unpack_frame(payload: bytes, height: int, width: int) -> np.ndarray:
    """FrameBlock payload -> grid; padding bits are ignored."""
    buf = np.frombuffer(payload, dtype=np.uint8, count=_frame_nbytes(height, width))
    bits = np.unpackbits(buf, count=height * width, bitorder="big")
    return bits.reshape(height, width)


def _boundary_code(boundary: str) -> int:
    if boundary not in _BOUNDARY_CODE:
        raise ValueError(f"unknown boundary {boundary!r}")
    return _BOUNDARY_CODE[boundary]


def _boundary_name(code: int, at: int) -> str:
    if code not in _BOUNDARY_NAME:
        raise FormatError(f"unknown boundary code {code} at offset {at}")
    return _BOUNDARY_NAME[code]


# ---------------------------------------------------------------------------
# CADS

_SPLITS = ("train", "val", "test")


def _write_block(out: BytesIO, ruleset: RuleSet, samples: list[Sample], k: int,
                 boundary: str, height: int, width: int):
    out.write(b"CADS")
    out.write(struct.pack("<BBBB", 1, _boundary_code(boundary), k, 0))
    out.write(struct.pack("<II", height, width))
    out.write(struct.pack("<I", len(ruleset)))
    for notation in ruleset.notations():
        raw = notation.encode("utf-8")
        out.write(struct.pack("<H", len(raw)))
        out.write(raw)
    out.write(struct.pack("<Q", len(samples)))
    for sample in samples:
        out.write(struct.pack("<I", sample.rule_id))
        for frame in sample.inputs:
            out.write(pack_frame(frame))
        out.write(pack_frame(sample.target))


def _read_block(reader: _Reader):
    reader.expect_magic(b"CADS")
    reader.expect_version(1, "CADS")
    at = reader.pos
    boundary = _boundary_name(reader.u8("boundary"), at)
    k = reader.u8("k")
    reader.u8("reserved")
    height = reader.u32("height")
    width = reader.u32("width")
    rule_count = reader.u32("rule count")
    rules = []
    for i in range(rule_count):
        n = reader.u16(f"rule {i} notation length")
        text = reader.take(n, f"rule {i} notation").decode("utf-8")
        rules.append(parse_notation(text))
    ruleset = RuleSet(rules=rules)
    sample_count = reader.u64("sample count")
    nbytes = _frame_nbytes(height, width)
    need = sample_count * (4 + (k + 1) * nbytes)
    if reader.pos + need > len(reader.data):
        raise TruncationError(
            f"{sample_count} declared samples need {need} bytes, "
            f"{len(reader.data) - reader.pos} remain", reader.pos)
    samples = []
    for i in range(sample_count):
        (rule_id,) = reader.unpack("<I", f"sample {i} rule id")
        if rule_id >= rule_count:
            raise FormatError(f"sample {i} rule id {rule_id} out of range ({rule_count} rules)")
        frames = [
            unpack_frame(reader.take(nbytes, f"sample {i} frame {j}"), height, width)
            for j in range(k + 1)
        ]
        samples.append(Sample(rule_id=rule_id, inputs=np.stack(frames[:k]), target=frames[k]))
    return ruleset, samples, k, boundary, height, width


def dataset_to_bytes(dataset: Dataset) -> bytes:
    out = BytesIO()
    for split in _SPLITS:
        ruleset = dataset.ruleset_test if split == "test" else dataset.ruleset_train
        _write_block(out, ruleset, dataset.splits[split], dataset.k,
                     dataset.boundary, dataset.height, dataset.width)
    return out.getvalue()


def dataset_from_bytes(data: bytes) -> Dataset:
    reader = _Reader(data)
    blocks = [_read_block(reader) for _ in _SPLITS]
    reader.expect_eof("CADS blocks")
    header = blocks[0][2:]
    for b in blocks[1:]:
        if b[2:] != header:
            raise FormatError("CADS blocks disagree on k/boundary/dimensions")
    k, boundary, height, width = header
    splits = {split: blocks[i][1] for i, split in enumerate(_SPLITS)}
    train_rules, val_rules = blocks[0][0], blocks[1][0]
    if train_rules.notations() != val_rules.notations():
        raise FormatError("train and val blocks carry different rule tables")
    return Dataset(
        k=k, boundary=boundary, height=height, width=width,
        ruleset_train=train_rules, ruleset_test=blocks[2][0],
        splits=splits, spec=None,
    )


def write_dataset(path, dataset: Dataset):
    _atomic_write(path, dataset_to_bytes(dataset))


def read_dataset(path) -> Dataset:
    with open(path, "rb") as f:
        return dataset_from_bytes(f.read())


# ---------------------------------------------------------------------------
# CAPR

CAPR_COUNT_OFFSET = 14  # magic 4 + version 1 + mode 1 + H 4 + W 4
CAPR_DIMS_OFFSET = 6


@dataclass
class Predictions:
    """Contents of a CAPR file: mode 0 binary frames, mode 1 probabilities."""

    mode: int
    frames: np.ndarray  # (count, H, W); uint8 for mode 0, float32 for mode 1


def write_predictions(path, frames: np.ndarray, mode: int | None = None):
    frames = np.asarray(frames)
    if frames.ndim != 3:
        raise ValueError(f"frames must be (count, H, W), got shape {frames.shape}")
    if mode is None:
        mode = 1 if np.issubdtype(frames.dtype, np.floating) else 0
    if mode not in (0, 1):
        raise ValueError(f"mode must be 0 or 1, got {mode}")
    count, height, width = frames.shape
    out = BytesIO()
    out.write(b"CAPR")
    out.write(struct.pack("<BB", 1, mode))
    out.write(struct.pack("<IIQ", height, width, count))
    if mode == 0:
        for frame in frames:
            out.write(pack_frame(frame))
    else:
        out.write(np.ascontiguousarray(frames, dtype="<f4").tobytes())
    _atomic_write(path, out.getvalue())


def read_predictions(path) -> Predictions:
    with open(path, "rb") as f:
        data = f.read()
    reader = _Reader(data)
    reader.expect_magic(b"CAPR")
    reader.expect_version(1, "CAPR")
    at = reader.pos
    mode = reader.u8("mode")
    if mode not in (0, 1):
        raise FormatError(f"unknown CAPR mode {mode} at offset {at}")
    height = reader.u32("height")
    width = reader.u32("width")
    count = reader.u64("frame count")
    if mode == 0:
        nbytes = _frame_nbytes(height, width)
        frames = np.stack(
            [unpack_frame(reader.take(nbytes, f"frame {i}"), height, width) for i in range(count)]
        ) if count else np.zeros((0, height, width), dtype=np.uint8)
    else:
        raw = reader.take(4 * count * height * width, "probability frames")
        frames = np.frombuffer(raw, dtype="<f4").reshape(count, height, width).astype(np.float32)
    reader.expect_eof("CAPR frames")
    return Predictions(mode=mode, frames=frames)


# ---------------------------------------------------------------------------
# CATR

def write_trajectory(path, trajectory: Trajectory):
    out = BytesIO()
    out.write(b"CATR")
    out.write(struct.pack("<BBH", 1, _boundary_code(trajectory.boundary), 0))
    out.write(struct.pack("<II", trajectory.height, trajectory.width))
    raw = format_notation(trajectory.rule).encode("utf-8")
    out.write(struct.pack("<H", len(raw)))
    out.write(raw)
    out.write(struct.pack("<Q", trajectory.states.shape[0]))
    for state in trajectory.states:
        out.write(pack_frame(state))
    _atomic_write(path, out.getvalue())


def read_trajectory(path) -> Trajectory:
    with open(path, "rb") as f:
        data = f.read()
    reader = _Reader(data)
    reader.expect_magic(b"CATR")
    reader.expect_version(1, "CATR")
    at = reader.pos
    boundary = _boundary_name(reader.u8("boundary"), at)
    reader.u16("reserved")
    height = reader.u32("height")
    width = reader.u32("width")
    n = reader.u16("rule notation length")
    rule = parse_notation(reader.take(n, "rule notation").decode("utf-8"))
    state_count = reader.u64("state count")
    if state_count < 1:
        raise FormatError("trajectory must contain at least the initial state")
    nbytes = _frame_nbytes(height, width)
    states = np.stack(
        [unpack_frame(reader.take(nbytes, f"state {t}"), height, width) for t in range(state_count)]
    )
    reader.expect_eof("CATR states")
    return Trajectory(rule=rule, states=states, boundary=boundary)


# ---------------------------------------------------------------------------
# rules text

def write_rules_text(path, ruleset: RuleSet):
    lines = []
    if ruleset.label:
        lines.append(f"# label: {ruleset.label}")
    lines.extend(ru.notation for ru in ruleset)
    _atomic_write(path, ("\n".join(lines) + "\n").encode("utf-8"))


def read_rules_text(path) -> RuleSet:
    label = ""
    rules: list[Rule] = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                comment = line.lstrip("#").strip()
                if comment.startswith("label:") and not label:
                    label = comment[len("label:"):].strip()
                continue
            rules.append(parse_notation(line))
    return RuleSet(rules=rules, label=label)


# ---------------------------------------------------------------------------
# PBM rendering

def render_pbm(grid, path, ascii_mode: bool = False):
    """Write a grid as a portable bitmap; 1 = black = alive.

    P4 (binary) by default, P1 (ASCII) with ascii_mode.
    """
    grid = ensure_grid(grid)
    h, w = grid.shape
    if ascii_mode:
        body = "\n".join(" ".join(str(int(c)) for c in row) for row in grid)
        _atomic_write(path, f"P1\n{w} {h}\n{body}\n".encode("ascii"))
    else:
        rows = np.packbits(grid, axis=1, bitorder="big")
        _atomic_write(path, f"P4\n{w} {h}\n".encode("ascii") + rows.tobytes())


# ---------------------------------------------------------------------------
# DatasetSpec flat key=value config

def format_spec_config(spec: DatasetSpec) -> str:
    lines = [
        f"level={spec.level}",
        f"grid_height={spec.grid_height}",
        f"grid_width={spec.grid_width}",
        f"k={spec.k}",
        f"steps_per_trajectory={spec.steps_per_trajectory}",
        f"configs_train={spec.configs_per_rule['train']}",
        f"configs_val={spec.configs_per_rule['val']}",
        f"configs_test={spec.configs_per_rule['test']}",
        f"density={spec.density!r}",
        f"boundary={spec.boundary}",
        f"master_seed={spec.master_seed}",
        f"train_rule_count={spec.train_rule_count}",
        f"test_rule_count={spec.test_rule_count}",
    ]
    return "\n".join(lines) + "\n"


def parse_spec_config(text: str) -> DatasetSpec:
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"spec config line {lineno} is not key=value: {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()

    def take(key, convert, default):
        return convert(values.pop(key)) if key in values else default

    defaults = DatasetSpec(level=take("level", str, "simple"))
    spec = DatasetSpec(
        level=defaults.level,
        grid_height=take("grid_height", int, defaults.grid_height),
        grid_width=take("grid_width", int, defaults.grid_width),
        k=take("k", int, defaults.k),
        steps_per_trajectory=take("steps_per_trajectory", int, defaults.steps_per_trajectory),
        configs_per_rule={
            "train": take("configs_train", int, defaults.configs_per_rule["train"]),
            "val": take("configs_val", int, defaults.configs_per_rule["val"]),
            "test": take("configs_test", int, defaults.configs_per_rule["test"]),
        },
        density=take("density", float, defaults.density),
        boundary=take("boundary", str, defaults.boundary),
        master_seed=take("master_seed", int, defaults.master_seed),
        train_rule_count=take("train_rule_count", int, defaults.train_rule_count),
        test_rule_count=take("test_rule_count", int, defaults.test_rule_count),
    )
    if values:
        raise FormatError(f"unknown spec config keys: {sorted(values)}")
    return spec


def write_spec_config(path, spec: DatasetSpec):
    _atomic_write(path, format_spec_config(spec).encode("utf-8"))


def read_spec_config(path) -> DatasetSpec:
    with open(path, "r", encoding="utf-8") as f:
        return parse_spec_config(f.read())
