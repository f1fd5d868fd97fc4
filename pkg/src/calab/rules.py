"""Born/Stay rules over square Moore neighborhoods.

A rule is written ``B<counts>/S<counts> n=<side>`` where the B-counts are
the numbers of living neighbors at which a dead cell is born and the
S-counts those at which a living cell survives.  ``n`` is the side length
of the Moore neighborhood (3 for the classic 3x3).  Conway's Game of Life
is ``B3/S2,3 n=3``, compactly ``B3/S23``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Rule",
    "RuleSet",
    "NotationError",
    "NotationRangeError",
    "EmptyRuleWarning",
    "moore_max_count",
    "parse_notation",
    "format_notation",
    "sample_rules",
]


class NotationError(ValueError):
    """Malformed rule notation."""


class NotationRangeError(NotationError):
    """Notation is well-formed but a count or neighborhood size is out of range."""


class EmptyRuleWarning(UserWarning):
    """Parsed rule has empty born and stay sets (maps every grid to all-dead)."""


def moore_max_count(radius: int) -> int:
    """Number of cells in a radius-r Moore neighborhood, center excluded."""
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    side = 2 * radius + 1
    return side * side - 1


@dataclass(frozen=True)
class Rule:
    """A Born/Stay transition rule.

    A dead cell becomes alive when its living-neighbor count is in ``born``;
    a living cell remains alive when its count is in ``stay``.  Counts are
    taken over the (2*radius+1)^2 - 1 surrounding cells.
    """

    radius: int
    born: frozenset[int] = field(default_factory=frozenset)
    stay: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "born", frozenset(self.born))
        object.__setattr__(self, "stay", frozenset(self.stay))
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")
        limit = self.max_count
        for name, counts, low in (("born", self.born, 1), ("stay", self.stay, 0)):
            for c in counts:
                if not low <= c <= limit:
                    raise ValueError(
                        f"{name} count {c} out of range [{low}, {limit}] for radius {self.radius}"
                    )

    @property
    def max_count(self) -> int:
        """Largest possible living-neighbor count for this neighborhood."""
        return moore_max_count(self.radius)

    @property
    def is_empty(self) -> bool:
        """True when born and stay are both empty (every cell dies)."""
        return not self.born and not self.stay

    @property
    def notation(self) -> str:
        return format_notation(self)

    def __repr__(self):
        return f"Rule({self.notation!r})"


@dataclass
class RuleSet:
    """An ordered list of rules; indices into it are the stable rule ids."""

    rules: list[Rule]
    label: str = ""

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __getitem__(self, i: int) -> Rule:
        return self.rules[i]

    def notations(self) -> list[str]:
        return [format_notation(r) for r in self.rules]


def _parse_counts(section: str, kind: str, n: int) -> frozenset[int]:
    if section == "":
        return frozenset()
    if "," in section:
        counts = set()
        for token in section.split(","):
            if not token.isdigit():
                raise NotationError(f"bad {kind} count token {token!r}")
            counts.add(int(token))
        return frozenset(counts)
    if not section.isdigit():
        raise NotationError(f"bad {kind} count token {section!r}")
    if n == 3:
        # compact digit form: every digit is one count
        return frozenset(int(ch) for ch in section)
    return frozenset({int(section)})


def parse_notation(text: str) -> Rule:
    """Parse ``B<counts>/S<counts> [n=<side>]`` into a Rule.

    Counts are comma-separated integers; for n=3 the compact digit form
    (``B3/S23``) is also accepted.  ``n`` defaults to 3.  Duplicate counts
    collapse.  A rule with no counts at all parses but raises
    EmptyRuleWarning.
    """
    tokens = text.strip().split()
    if not tokens:
        raise NotationError("empty rule notation")
    if len(tokens) > 2:
        raise NotationError(f"unexpected token {tokens[2]!r}")

    n = 3
    if len(tokens) == 2:
        suffix = tokens[1]
        if not suffix.startswith("n=") or not suffix[2:].isdigit():
            raise NotationError(f"bad neighborhood token {suffix!r}")
        n = int(suffix[2:])
        if n < 3 or n % 2 == 0:
            raise NotationRangeError(f"neighborhood size must be odd and >= 3, got {n}")

    body = tokens[0]
    if not body.startswith("B"):
        raise NotationError(f"rule must start with 'B', got {body!r}")
    sep = body.find("/")
    if sep < 0 or sep + 1 >= len(body) or body[sep + 1] != "S":
        raise NotationError(f"missing '/S' separator in {body!r}")

    born = _parse_counts(body[1:sep], "born", n)
    stay = _parse_counts(body[sep + 2 :], "stay", n)

    radius = (n - 1) // 2
    limit = moore_max_count(radius)
    for kind, counts, low in (("born", born, 1), ("stay", stay, 0)):
        for c in counts:
            if not low <= c <= limit:
                raise NotationRangeError(
                    f"{kind} count {c} out of range [{low}, {limit}] for n={n}"
                )

    if not born and not stay:
        warnings.warn(f"rule {text!r} has empty born and stay sets", EmptyRuleWarning)
    return Rule(radius=radius, born=born, stay=stay)


def format_notation(rule: Rule, compact: bool = False) -> str:
    """Canonical notation: ascending comma-separated counts, explicit n.

    With ``compact=True`` (radius 1 only) counts are emitted as a digit
    string, e.g. ``B3/S23 n=3``.
    """
    if compact and rule.radius != 1:
        raise ValueError("compact digit form is only defined for radius 1")
    joiner = "" if compact else ","
    born = joiner.join(str(c) for c in sorted(rule.born))
    stay = joiner.join(str(c) for c in sorted(rule.stay))
    return f"B{born}/S{stay} n={2 * rule.radius + 1}"


def sample_rules(
    count: int,
    radius: int,
    rng_seed: int,
    exclude: set[str] | frozenset[str] = frozenset(),
) -> RuleSet:
    """Sample `count` distinct non-empty rules at the given radius.

    Each candidate count is included independently with probability 1/2
    (born over [1, max_count], stay over [0, max_count]).  Empty rules,
    duplicates within the set, and rules whose canonical notation appears
    in `exclude` are rejected and resampled.  Deterministic per seed.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    limit = moore_max_count(radius)
    # distinct valid rules: any (born, stay) pair except the empty one
    capacity = 2 ** (2 * limit + 1) - 1
    if count > capacity - len(exclude):
        raise ValueError(
            f"cannot sample {count} distinct rules at radius {radius} "
            f"(capacity {capacity}, {len(exclude)} excluded)"
        )

    rng = np.random.default_rng(rng_seed)
    rules: list[Rule] = []
    seen: set[str] = set(exclude)
    while len(rules) < count:
        born_mask = rng.random(limit) < 0.5
        stay_mask = rng.random(limit + 1) < 0.5
        born = frozenset(int(c) for c in np.nonzero(born_mask)[0] + 1)
        stay = frozenset(int(c) for c in np.nonzero(stay_mask)[0])
        if not born and not stay:
            continue
        rule = Rule(radius=radius, born=born, stay=stay)
        key = format_notation(rule)
        if key in seen:
            continue
        seen.add(key)
        rules.append(rule)
    return RuleSet(rules=rules, label=f"sampled radius={radius} seed={rng_seed}")
