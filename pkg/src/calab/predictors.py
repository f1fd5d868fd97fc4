"""Next-state predictors.

A predictor maps k input frames (oldest first) to one predicted frame of
the same shape, binary.  Besides the trivial baselines there is an exactly
constructed convolutional network: one (2r+1)x(2r+1) integer kernel encodes
(neighbor count, center state) injectively into a single code value, and a
stack of 1x1 ReLU "triangle" units turns membership of that code in the
rule's alive set into a hard 0/1 output.  No training involved; it equals
the engine step on every grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np
from scipy import ndimage

from .engine import ensure_grid, step
from .rules import Rule, RuleSet, moore_max_count

__all__ = [
    "PredictorContract",
    "PREDICTOR_NAMES",
    "oracle_predictor",
    "copy_last",
    "flip_all",
    "constant_majority",
    "ConstructedConvNet",
    "build_constructed_net",
    "forward",
    "triangle_response",
    "convnet_predictor",
    "rulewise",
]


class PredictorContract(Protocol):
    def predict(self, inputs: Sequence[np.ndarray]) -> np.ndarray: ...


@dataclass(frozen=True)
class _Oracle:
    rule: Rule
    boundary: str = "dead"

    def predict(self, inputs):
        return step(self.rule, inputs[-1], self.boundary)


@dataclass(frozen=True)
class _CopyLast:
    def predict(self, inputs):
        return ensure_grid(inputs[-1]).copy()


@dataclass(frozen=True)
class _FlipAll:
    def predict(self, inputs):
        return (1 - ensure_grid(inputs[-1])).astype(np.uint8)


@dataclass(frozen=True)
class _ConstantMajority:
    live_fraction: float

    def predict(self, inputs):
        last = ensure_grid(inputs[-1])
        fill = 1 if self.live_fraction >= 0.5 else 0
        return np.full_like(last, fill)


def oracle_predictor(rule: Rule, boundary: str = "dead") -> PredictorContract:
    """Ground-truth predictor: applies the generating rule to the last frame."""
    return _Oracle(rule=rule, boundary=boundary)


def copy_last() -> PredictorContract:
    """Returns the newest input frame unchanged (beats nothing but static rules)."""
    return _CopyLast()


def flip_all() -> PredictorContract:
    """Returns the cellwise complement of the newest frame (alternating rules)."""
    return _FlipAll()


def constant_majority(training_live_fraction: float) -> PredictorContract:
    """All-dead if the training live fraction is < 1/2, else all-alive."""
    if not 0.0 <= training_live_fraction <= 1.0:
        raise ValueError(f"live fraction must be in [0, 1], got {training_live_fraction}")
    return _ConstantMajority(live_fraction=training_live_fraction)


# ---------------------------------------------------------------------------
# constructed convolutional network

@dataclass(frozen=True)
class ConstructedConvNet:
    """Exact conv-net realization of a Born/Stay rule.

    code_kernel convolves to q = count + (max_count+1) * center, which is a
    different integer for every (center state, count) pair; alive_codes are
    the q values whose next state is alive.
    """

    radius: int
    code_kernel: np.ndarray = field(repr=False)
    alive_codes: tuple[int, ...]

    @property
    def center_weight(self) -> int:
        return moore_max_count(self.radius) + 1


def build_constructed_net(rule: Rule) -> ConstructedConvNet:
    """One triangle-unit group per born/stay count; exact by construction."""
    side = 2 * rule.radius + 1
    multiplier = rule.max_count + 1
    kernel = np.ones((side, side), dtype=np.int64)
    kernel[rule.radius, rule.radius] = multiplier
    codes = sorted(set(rule.born) | {s + multiplier for s in rule.stay})
    return ConstructedConvNet(
        radius=rule.radius, code_kernel=kernel, alive_codes=tuple(codes)
    )


def triangle_response(values: np.ndarray, code: int) -> np.ndarray:
    """r(q-m+1) - 2 r(q-m) + r(q-m-1): 1 exactly at q == m, 0 at other integers."""
    q = np.asarray(values, dtype=np.int64)
    relu = lambda x: np.maximum(x, 0)
    return relu(q - code + 1) - 2 * relu(q - code) + relu(q - code - 1)


def forward(net: ConstructedConvNet, grid, boundary: str = "dead") -> np.ndarray:
    """Run the constructed net; batch-friendly on leading axes.

    Dead-boundary evaluation zero-pads by the kernel radius; the toroidal
    variant wraps the input before convolving.  All arithmetic is integer,
    so the output is exactly 0/1.
    """
    grid = ensure_grid(grid).astype(np.int64)
    kernel = net.code_kernel
    if grid.ndim > 2:
        kernel = kernel.reshape((1,) * (grid.ndim - 2) + kernel.shape)
    mode = "wrap" if boundary == "toroidal" else "constant"
    codes = ndimage.correlate(grid, kernel, mode=mode, cval=0)
    out = np.zeros_like(codes)
    for code in net.alive_codes:
        out += triangle_response(codes, code)
    return out.astype(np.uint8)


@dataclass(frozen=True)
class _ConvNetPredictor:
    net: ConstructedConvNet
    boundary: str = "dead"

    def predict(self, inputs):
        return forward(self.net, inputs[-1], self.boundary)


def convnet_predictor(rule: Rule, boundary: str = "dead") -> PredictorContract:
    return _ConvNetPredictor(net=build_constructed_net(rule), boundary=boundary)


def rulewise(factory, ruleset: RuleSet, boundary: str = "dead") -> dict[int, PredictorContract]:
    """Per-rule predictor bank for rule-aware predictors (oracle, convnet)."""
    return {i: factory(rule, boundary) for i, rule in enumerate(ruleset)}


PREDICTOR_NAMES = ("oracle", "copy-last", "flip-all", "constant", "convnet")


def by_name(name: str, ruleset: RuleSet, boundary: str = "dead",
            training_live_fraction: float = 0.5):
    """CLI-facing predictor lookup; oracle and convnet return per-rule banks."""
    if name == "oracle":
        return rulewise(oracle_predictor, ruleset, boundary)
    if name == "convnet":
        return rulewise(convnet_predictor, ruleset, boundary)
    if name == "copy-last":
        return copy_last()
    if name == "flip-all":
        return flip_all()
    if name == "constant":
        return constant_majority(training_live_fraction)
    raise ValueError(f"unknown predictor {name!r}; expected one of {PREDICTOR_NAMES}")
