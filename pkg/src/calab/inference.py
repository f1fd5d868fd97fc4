"""Recover Born/Stay rules from observed grid transitions.

Every cell transition is classified by (center state, living-neighbor
count, next state) and tallied.  A count column whose observations all
agree determines membership in born/stay; a column observed with both
outcomes proves the data was not generated by any single Born/Stay rule at
this radius.  Unobserved columns stay out of the inferred sets, which
yields the minimal rule consistent with the evidence; the identifiability
report lists them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import ensure_grid, neighbor_counts
from .rules import Rule, moore_max_count

__all__ = [
    "UNOBSERVED",
    "ALWAYS_ALIVE",
    "ALWAYS_DEAD",
    "CONTRADICTORY",
    "InconsistencyError",
    "TransitionEvidence",
    "IdentifiabilityReport",
    "observe",
    "infer_rule",
    "infer_smallest_radius",
]

UNOBSERVED = "unobserved"
ALWAYS_ALIVE = "always_alive"
ALWAYS_DEAD = "always_dead"
CONTRADICTORY = "contradictory"

_STATE_NAMES = {0: "dead", 1: "alive"}


class InconsistencyError(ValueError):
    """Observations contradict every single rule at this radius.

    `pairs` holds the offending (center state, count) combinations.
    """

    def __init__(self, pairs: list[tuple[int, int]]):
        described = ", ".join(f"({_STATE_NAMES[s]}, count={c})" for s, c in pairs)
        super().__init__(f"contradictory transitions observed for {described}")
        self.pairs = pairs


class TransitionEvidence:
    """Tally of observed (center state, neighbor count, next state) triples."""

    def __init__(self, radius: int):
        if radius < 1:
            raise ValueError(f"radius must be >= 1, got {radius}")
        self.radius = radius
        self.tallies = np.zeros((2, moore_max_count(radius) + 1, 2), dtype=np.int64)

    @property
    def total_observations(self) -> int:
        return int(self.tallies.sum())

    def observe(self, before, after, boundary: str = "dead"):
        """Tally every cell of one (state, next state) grid pair."""
        before = ensure_grid(before)
        after = ensure_grid(after)
        if before.shape != after.shape:
            raise ValueError(
                f"shape mismatch: before {before.shape} vs after {after.shape}"
            )
        counts = neighbor_counts(before, self.radius, boundary)
        np.add.at(self.tallies, (before.ravel(), counts.ravel(), after.ravel()), 1)
        return self

    def merge(self, other: "TransitionEvidence"):
        """Exact combination of independently accumulated evidence."""
        if other.radius != self.radius:
            raise ValueError(f"radius mismatch: {self.radius} vs {other.radius}")
        self.tallies += other.tallies
        return self

    def classify(self, state: int, count: int) -> str:
        dead_next, alive_next = self.tallies[state, count]
        if dead_next == 0 and alive_next == 0:
            return UNOBSERVED
        if dead_next == 0:
            return ALWAYS_ALIVE
        if alive_next == 0:
            return ALWAYS_DEAD
        return CONTRADICTORY

    def classifications(self, state: int) -> list[str]:
        return [self.classify(state, c) for c in range(self.tallies.shape[1])]

    def contradictions(self) -> list[tuple[int, int]]:
        both = (self.tallies > 0).all(axis=2)
        return [(int(s), int(c)) for s, c in zip(*np.nonzero(both))]


@dataclass
class IdentifiabilityReport:
    """Which count columns the evidence pins down and which stay ambiguous."""

    radius: int
    unobserved_born: list[int]
    unobserved_stay: list[int]
    total_observations: int

    @property
    def fully_identified(self) -> bool:
        return not self.unobserved_born and not self.unobserved_stay

    def describe(self) -> str:
        lines = [
            f"radius {self.radius}, {self.total_observations} cell transitions observed",
        ]
        if self.fully_identified:
            lines.append("all (state, count) columns observed: rule fully identified")
        else:
            if self.unobserved_born:
                lines.append(
                    "born counts never observed (treated as absent): "
                    + ", ".join(map(str, self.unobserved_born))
                )
            if self.unobserved_stay:
                lines.append(
                    "stay counts never observed (treated as absent): "
                    + ", ".join(map(str, self.unobserved_stay))
                )
        return "\n".join(lines)


def observe(evidence: TransitionEvidence, before, after,
            boundary: str = "dead") -> TransitionEvidence:
    """Accumulate one observed transition pair into the evidence."""
    return evidence.observe(before, after, boundary)


def infer_rule(evidence: TransitionEvidence) -> tuple[Rule, IdentifiabilityReport]:
    """The unique minimal rule matching all observations.

    Raises InconsistencyError if any (state, count) column was seen with
    both outcomes.  The returned rule reproduces every observed transition;
    unobserved columns default to "not in the set".
    """
    pairs = evidence.contradictions()
    if pairs:
        raise InconsistencyError(pairs)
    limit = moore_max_count(evidence.radius)
    born = frozenset(
        c for c in range(1, limit + 1) if evidence.classify(0, c) == ALWAYS_ALIVE
    )
    stay = frozenset(
        c for c in range(limit + 1) if evidence.classify(1, c) == ALWAYS_ALIVE
    )
    report = IdentifiabilityReport(
        radius=evidence.radius,
        unobserved_born=[c for c in range(1, limit + 1) if evidence.classify(0, c) == UNOBSERVED],
        unobserved_stay=[c for c in range(limit + 1) if evidence.classify(1, c) == UNOBSERVED],
        total_observations=evidence.total_observations,
    )
    return Rule(radius=evidence.radius, born=born, stay=stay), report


def infer_smallest_radius(pairs, boundary: str = "dead", max_radius: int = 8):
    """Try radii 1, 2, ... and return the first consistent inference.

    `pairs` is a sequence of (before, after) grids.  Returns
    (rule, report, radius); raises the radius-`max_radius` InconsistencyError
    if nothing fits.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("need at least one (before, after) pair")
    last_error: InconsistencyError | None = None
    for radius in range(1, max_radius + 1):
        evidence = TransitionEvidence(radius)
        for before, after in pairs:
            evidence.observe(before, after, boundary)
        try:
            rule, report = infer_rule(evidence)
            return rule, report, radius
        except InconsistencyError as err:
            last_error = err
    assert last_error is not None
    raise last_error
