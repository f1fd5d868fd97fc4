"""Readers/writers for the dataset and prediction wire formats.

This component exchanges data with the CA laboratory exclusively through
files, so the formats are implemented here from their byte-level contract
(all integers little-endian, frames packed row-major MSB-first):

- CADS dataset file: three blocks (train, val, test), each
  magic "CADS" | version u8=1 | boundary u8 | k u8 | reserved u8 |
  H u32 | W u32 | rule_count u32 | rules (u16 length + UTF-8 notation) |
  sample_count u64 | samples (rule_id u32 + (k+1) packed frames).
- CAPR prediction file: magic "CAPR" | version u8=1 | mode u8
  (0 binary, 1 float32 probabilities) | H u32 | W u32 | count u64 | frames.
- DatasetSpec config: flat key=value text.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass

import numpy as np

__all__ = ["SplitData", "CadsFile", "read_cads", "write_capr", "read_spec_config"]

_SPLITS = ("train", "val", "test")
_BOUNDARIES = {0: "dead", 1: "toroidal"}


class FormatError(ValueError):
    pass


@dataclass
class SplitData:
    """One CADS block: samples plus the rule table their ids index into."""

    rule_notations: list[str]
    rule_ids: np.ndarray  # (N,) int64
    inputs: np.ndarray    # (N, k, H, W) uint8
    targets: np.ndarray   # (N, H, W) uint8

    def __len__(self):
        return len(self.rule_ids)

    def rule_radii(self) -> np.ndarray:
        """Neighborhood radius per rule, parsed from the `n=` suffix."""
        radii = []
        for notation in self.rule_notations:
            m = re.search(r"n=(\d+)$", notation)
            if not m:
                raise FormatError(f"rule notation without n= suffix: {notation!r}")
            radii.append((int(m.group(1)) - 1) // 2)
        return np.array(radii, dtype=np.int64)


@dataclass
class CadsFile:
    k: int
    boundary: str
    height: int
    width: int
    splits: dict[str, SplitData]


class _Cursor:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(f"truncated file at offset {self.pos} (wanted {n} bytes)")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _read_block(cur: _Cursor):
    if cur.take(4) != b"CADS":
        raise FormatError("bad CADS magic")
    version, boundary_code, k, _ = cur.unpack("<BBBB")
    if version != 1:
        raise FormatError(f"unsupported CADS version {version}")
    if boundary_code not in _BOUNDARIES:
        raise FormatError(f"unknown boundary code {boundary_code}")
    height, width = cur.unpack("<II")
    (rule_count,) = cur.unpack("<I")
    notations = []
    for _ in range(rule_count):
        (n,) = cur.unpack("<H")
        notations.append(cur.take(n).decode("utf-8"))
    (sample_count,) = cur.unpack("<Q")
    frame_bytes = (height * width + 7) // 8
    rule_ids = np.empty(sample_count, dtype=np.int64)
    inputs = np.empty((sample_count, k, height, width), dtype=np.uint8)
    targets = np.empty((sample_count, height, width), dtype=np.uint8)
    for i in range(sample_count):
        (rule_ids[i],) = cur.unpack("<I")
        for j in range(k + 1):
            raw = np.frombuffer(cur.take(frame_bytes), dtype=np.uint8)
            frame = np.unpackbits(raw, count=height * width, bitorder="big")
            frame = frame.reshape(height, width)
            if j < k:
                inputs[i, j] = frame
            else:
                targets[i] = frame
    split = SplitData(rule_notations=notations, rule_ids=rule_ids,
                      inputs=inputs, targets=targets)
    return split, (k, _BOUNDARIES[boundary_code], height, width)


def read_cads(path) -> CadsFile:
    with open(path, "rb") as f:
        cur = _Cursor(f.read())
    splits = {}
    header = None
    for name in _SPLITS:
        split, this_header = _read_block(cur)
        if header is None:
            header = this_header
        elif this_header != header:
            raise FormatError("CADS blocks disagree on k/boundary/dimensions")
        splits[name] = split
    k, boundary, height, width = header
    return CadsFile(k=k, boundary=boundary, height=height, width=width, splits=splits)


def write_capr(path, probabilities: np.ndarray):
    """Write float32 probability frames (mode 1), in split sample order."""
    frames = np.ascontiguousarray(probabilities, dtype="<f4")
    if frames.ndim != 3:
        raise ValueError(f"expected (count, H, W) frames, got shape {frames.shape}")
    count, height, width = frames.shape
    with open(path, "wb") as f:
        f.write(b"CAPR")
        f.write(struct.pack("<BB", 1, 1))
        f.write(struct.pack("<IIQ", height, width, count))
        f.write(frames.tobytes())


def read_spec_config(path) -> dict[str, str]:
    """Flat key=value dataset config; values stay strings."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values
