"""Generalization datasets: trajectories sliced into (k frames -> next frame).

Five levels control what differs between the train and test splits:

================= ================== =========================
level             train radii        test
================= ================== =========================
simple            1                  same rules, new configs
level1            1, 2, 3            same rules, new configs
level2            1, 2, 3            30 unseen rules, radii 1-3
level3_extrapolation  1, 2, 3        30 unseen rules, radius 4
level3_interpolation  1, 2, 4        30 unseen rules, radius 3
================= ================== =========================

Validation always reuses the training rules with fresh initial
configurations.  Every trajectory gets its own RNG substream derived from
(config seed, split, rule id, config index), so builds are reproducible
and independent of worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .engine import BOUNDARIES, Trajectory, ensure_grid, simulate, step
from .rules import Rule, RuleSet, sample_rules

__all__ = [
    "LEVELS",
    "canonical_level",
    "Sample",
    "DatasetSpec",
    "Dataset",
    "VerifyReport",
    "sample_initial",
    "slice_trajectory",
    "build",
    "verify",
]

# level -> (train radii, test radii); None = test reuses the training rules
LEVELS: dict[str, tuple[list[int], list[int] | None]] = {
    "simple": ([1], None),
    "level1": ([1, 2, 3], None),
    "level2": ([1, 2, 3], [1, 2, 3]),
    "level3_extrapolation": ([1, 2, 3], [4]),
    "level3_interpolation": ([1, 2, 4], [3]),
}

_LEVEL_ALIASES = {
    "simple": "simple",
    "l1": "level1",
    "level1": "level1",
    "l2": "level2",
    "level2": "level2",
    "l3x": "level3_extrapolation",
    "level3_extrapolation": "level3_extrapolation",
    "l3i": "level3_interpolation",
    "level3_interpolation": "level3_interpolation",
}

SPLITS = ("train", "val", "test")
_SPLIT_CODE = {"train": 0, "val": 1, "test": 2}


def canonical_level(name: str) -> str:
    key = name.strip().lower().replace("-", "_")
    if key not in _LEVEL_ALIASES:
        raise ValueError(f"unknown level {name!r}; expected one of {sorted(_LEVEL_ALIASES)}")
    return _LEVEL_ALIASES[key]


@dataclass
class Sample:
    """k consecutive input frames plus the state that follows them."""

    rule_id: int
    inputs: np.ndarray  # (k, H, W) uint8, oldest first
    target: np.ndarray  # (H, W) uint8

    def __eq__(self, other):
        if not isinstance(other, Sample):
            return NotImplemented
        return (
            self.rule_id == other.rule_id
            and self.inputs.shape == other.inputs.shape
            and np.array_equal(self.inputs, other.inputs)
            and np.array_equal(self.target, other.target)
        )


@dataclass
class DatasetSpec:
    """Everything that determines a dataset build, seeds included."""

    level: str
    grid_height: int = 32
    grid_width: int = 32
    k: int = 3
    steps_per_trajectory: int = 12
    configs_per_rule: dict[str, int] = field(
        default_factory=lambda: {"train": 4, "val": 1, "test": 2}
    )
    density: float = 0.5
    boundary: str = "dead"
    master_seed: int = 0
    train_rule_count: int = 300
    test_rule_count: int = 30

    def __post_init__(self):
        self.level = canonical_level(self.level)
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if not 0.0 < self.density < 1.0:
            raise ValueError(f"density must be in (0, 1), got {self.density}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.steps_per_trajectory < self.k:
            raise ValueError(
                f"steps_per_trajectory ({self.steps_per_trajectory}) must be >= k ({self.k})"
            )
        if set(self.configs_per_rule) != set(SPLITS):
            raise ValueError(f"configs_per_rule must have keys {SPLITS}")
        if self.grid_height < 1 or self.grid_width < 1:
            raise ValueError("grid dimensions must be >= 1")
        train_radii, _ = LEVELS[self.level]
        if self.train_rule_count < len(train_radii):
            raise ValueError(
                f"need at least {len(train_radii)} train rules for level {self.level}"
            )


@dataclass
class Dataset:
    """Built samples per split plus the rule tables they index into."""

    k: int
    boundary: str
    height: int
    width: int
    ruleset_train: RuleSet
    ruleset_test: RuleSet
    splits: dict[str, list[Sample]]
    spec: DatasetSpec | None = None
    stats: dict | None = None

    def rules_for(self, split: str) -> RuleSet:
        return self.ruleset_test if split == "test" else self.ruleset_train

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            (self.k, self.boundary, self.height, self.width)
            == (other.k, other.boundary, other.height, other.width)
            and self.ruleset_train.notations() == other.ruleset_train.notations()
            and self.ruleset_test.notations() == other.ruleset_test.notations()
            and all(self.splits[s] == other.splits[s] for s in SPLITS)
        )


def sample_initial(height: int, width: int, density: float, seed) -> np.ndarray:
    """Random grid, each cell alive independently with probability `density`."""
    if not 0.0 < density < 1.0:
        raise ValueError(f"density must be in (0, 1), got {density}")
    rng = np.random.default_rng(seed)
    return (rng.random((height, width)) < density).astype(np.uint8)


def slice_trajectory(trajectory: Trajectory, k: int, rule_id: int = 0) -> list[Sample]:
    """All stride-1 windows: inputs = states[t..t+k-1], target = states[t+k]."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if trajectory.steps < k:
        raise ValueError(
            f"trajectory too short: {trajectory.steps} steps < window k={k}"
        )
    states = trajectory.states
    return [
        Sample(rule_id=rule_id, inputs=states[t : t + k].copy(), target=states[t + k].copy())
        for t in range(trajectory.steps - k + 1)
    ]


def _split_counts(total: int, radii: list[int]) -> list[int]:
    base, extra = divmod(total, len(radii))
    return [base + (1 if i < extra else 0) for i in range(len(radii))]


def _radius_seed(rule_seed: int, radius: int, salt: int) -> int:
    return int(np.random.SeedSequence([rule_seed, salt, radius]).generate_state(1)[0])


def _sample_level_rules(spec: DatasetSpec, rule_seed: int) -> tuple[RuleSet, RuleSet]:
    train_radii, test_radii = LEVELS[spec.level]
    train_rules: list[Rule] = []
    for radius, n in zip(train_radii, _split_counts(spec.train_rule_count, train_radii)):
        train_rules.extend(sample_rules(n, radius, _radius_seed(rule_seed, radius, 0)).rules)
    ruleset_train = RuleSet(rules=train_rules, label=f"{spec.level} train")

    if test_radii is None:
        ruleset_test = RuleSet(rules=list(train_rules), label=f"{spec.level} test=train")
    else:
        taken = set(ruleset_train.notations())
        test_rules: list[Rule] = []
        for radius, n in zip(test_radii, _split_counts(spec.test_rule_count, test_radii)):
            fresh = sample_rules(n, radius, _radius_seed(rule_seed, radius, 1), exclude=taken)
            test_rules.extend(fresh.rules)
            taken.update(fresh.notations())
        ruleset_test = RuleSet(rules=test_rules, label=f"{spec.level} test")
    return ruleset_train, ruleset_test


def _trajectory_seed(config_seed: int, split: str, rule_id: int, config_index: int):
    return np.random.SeedSequence(
        [config_seed, _SPLIT_CODE[split], rule_id, config_index]
    )


def _generate_unit(args) -> tuple[list[tuple[np.ndarray, np.ndarray]], int]:
    """One (rule, split, config) trajectory -> its samples and a triviality flag."""
    rule, spec, config_seed, split, rule_id, config_index = args
    seed = _trajectory_seed(config_seed, split, rule_id, config_index)
    initial = sample_initial(spec.grid_height, spec.grid_width, spec.density, seed)
    traj = simulate(rule, initial, spec.steps_per_trajectory, spec.boundary)
    early = traj.states[: spec.k + 1]
    trivial = int(any(s.all() or not s.any() for s in early))
    samples = [(s.inputs, s.target) for s in slice_trajectory(traj, spec.k, rule_id)]
    return samples, trivial


def build(spec: DatasetSpec, rule_seed: int | None = None,
          config_seed: int | None = None, workers: int = 1) -> Dataset:
    """Build all three splits of a level dataset.

    Fully deterministic from (rule_seed, config_seed), both defaulting to
    spec.master_seed; output bytes do not depend on `workers`.
    """
    if rule_seed is None:
        rule_seed = spec.master_seed
    if config_seed is None:
        config_seed = spec.master_seed
    if rule_seed < 0 or config_seed < 0:
        raise ValueError("seeds must be non-negative")

    ruleset_train, ruleset_test = _sample_level_rules(spec, rule_seed)

    units = []
    for split in SPLITS:
        ruleset = ruleset_test if split == "test" else ruleset_train
        for rule_id, rule in enumerate(ruleset):
            for config_index in range(spec.configs_per_rule[split]):
                units.append((rule, spec, config_seed, split, rule_id, config_index))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_generate_unit, units, chunksize=16))
    else:
        results = [_generate_unit(u) for u in units]

    splits: dict[str, list[Sample]] = {s: [] for s in SPLITS}
    trivial = {s: 0 for s in SPLITS}
    totals = {s: 0 for s in SPLITS}
    for unit, (samples, was_trivial) in zip(units, results):
        split, rule_id = unit[3], unit[4]
        splits[split].extend(
            Sample(rule_id=rule_id, inputs=inp, target=tgt) for inp, tgt in samples
        )
        trivial[split] += was_trivial
        totals[split] += 1

    stats = {
        "trivial_trajectory_fraction": {
            s: (trivial[s] / totals[s] if totals[s] else 0.0) for s in SPLITS
        }
    }
    return Dataset(
        k=spec.k, boundary=spec.boundary,
        height=spec.grid_height, width=spec.grid_width,
        ruleset_train=ruleset_train, ruleset_test=ruleset_test,
        splits=splits, spec=spec, stats=stats,
    )


@dataclass
class VerifyReport:
    """Outcome of re-simulating every sample and auditing split structure."""

    total_samples: int
    mismatches: list[tuple[str, int]]  # (split, sample index)
    rule_tables_ok: bool
    radii_ok: bool | None  # None when the dataset has no spec to check against
    train_radii: list[int]
    test_radii: list[int]
    trivial_fraction: dict[str, float] | None

    @property
    def mismatch_count(self) -> int:
        return len(self.mismatches)

    @property
    def ok(self) -> bool:
        return not self.mismatches and self.rule_tables_ok and self.radii_ok is not False


def verify(dataset: Dataset) -> VerifyReport:
    """Recompute every target with the reference engine and audit the splits."""
    mismatches = []
    total = 0
    for split in SPLITS:
        ruleset = dataset.rules_for(split)
        for i, sample in enumerate(dataset.splits[split]):
            total += 1
            rule = ruleset[sample.rule_id]
            expected = step(rule, sample.inputs[-1], dataset.boundary)
            if not np.array_equal(expected, ensure_grid(sample.target)):
                mismatches.append((split, i))

    train_notations = dataset.ruleset_train.notations()
    test_notations = dataset.ruleset_test.notations()
    spec = dataset.spec
    if spec is not None and LEVELS[spec.level][1] is None:
        rule_tables_ok = train_notations == test_notations
    else:
        rule_tables_ok = not (set(train_notations) & set(test_notations))

    train_radii = sorted({r.radius for r in dataset.ruleset_train})
    test_radii = sorted({r.radius for r in dataset.ruleset_test})
    radii_ok = None
    if spec is not None:
        want_train, want_test = LEVELS[spec.level]
        radii_ok = train_radii == sorted(want_train) and (
            test_radii == sorted(want_train) if want_test is None
            else test_radii == sorted(want_test)
        )

    return VerifyReport(
        total_samples=total,
        mismatches=mismatches,
        rule_tables_ok=rule_tables_ok,
        radii_ok=radii_ok,
        train_radii=train_radii,
        test_radii=test_radii,
        trivial_fraction=(dataset.stats or {}).get("trivial_trajectory_fraction"),
    )
