"""Command-line entry point.

Subcommands cover the full pipeline: gen-rules, simulate, build-dataset,
eval, infer, render, bench.  All randomness is controlled by explicit seed
flags, so identical invocations produce identical files and output.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 inference
inconsistency.  --workers defaults to $CALAB_WORKERS (else 1).
"""

from __future__ import annotations

import argparse
import os
import statistics
import sys
import time
from dataclasses import replace

from . import __version__, dataset as ds, evaluation, inference, io, predictors, rules
from .engine import BOUNDARIES, simulate, step, step_packed

_WORKERS_ENV = "CALAB_WORKERS"


class _Parser(argparse.ArgumentParser):
    # spec reserves exit code 2 for data errors; argparse default is 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get(_WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _odd_neighborhood(text: str) -> int:
    n = int(text)
    if n < 3 or n % 2 == 0:
        raise argparse.ArgumentTypeError(f"neighborhood size must be odd and >= 3, got {n}")
    return n


def _size(text: str) -> tuple[int, int]:
    try:
        h, w = text.lower().split("x")
        return int(h), int(w)
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must look like HxW, got {text!r}") from None


def build_parser() -> _Parser:
    parser = _Parser(prog="calab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"calab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("gen-rules", help="sample random Born/Stay rules to a text file")
    p.add_argument("--count", type=int, required=True, help="number of distinct rules")
    p.add_argument("--neighborhood", type=_odd_neighborhood, default=3, metavar="N",
                   help="Moore neighborhood side length (odd, >= 3; default 3)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output rules text file")

    p = sub.add_parser("simulate", help="evolve a random initial grid under one rule")
    p.add_argument("--rule", required=True, help='rule notation, e.g. "B3/S23" or "B1,4/S2 n=5"')
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--density", type=float, default=0.5, help="initial live fraction (default 0.5)")
    p.add_argument("--boundary", choices=BOUNDARIES, default="dead")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output trajectory (CATR) file")

    p = sub.add_parser("build-dataset", help="build a generalization-level dataset (CADS)")
    p.add_argument("--level", required=True,
                   help="simple | l1 | l2 | l3x | l3i (long forms accepted)")
    p.add_argument("--config", help="DatasetSpec key=value file; flags override its level")
    p.add_argument("--rule-seed", type=int, default=None)
    p.add_argument("--config-seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=_default_workers())
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="score a predictor or prediction file against a split")
    p.add_argument("--dataset", required=True, help="CADS file")
    p.add_argument("--split", choices=ds.SPLITS, default="test")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--predictor", choices=predictors.PREDICTOR_NAMES)
    group.add_argument("--predictions", help="CAPR file in split order")
    p.add_argument("--per-rule", action="store_true", help="include per-rule rows in the report")
    p.add_argument("--error-maps", metavar="DIR", help="write per-sample error maps as PBM files")
    p.add_argument("--workers", type=int, default=_default_workers())
    p.add_argument("--report", required=True, help="output report (key=value) file")

    p = sub.add_parser("infer", help="recover the Born/Stay rule behind a trajectory")
    p.add_argument("--trajectory", required=True, help="CATR trajectory or CADS dataset file")
    p.add_argument("--radius", type=int)
    p.add_argument("--auto-radius", action="store_true",
                   help="try radii 1, 2, ... and pick the smallest consistent one")
    p.add_argument("--max-radius", type=int, default=8)
    p.add_argument("--out", help="write the inferred rule as a rules text file")

    p = sub.add_parser("render", help="render one trajectory frame as a PBM image")
    p.add_argument("--in", dest="infile", required=True, help="CATR trajectory file")
    p.add_argument("--frame", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--ascii", action="store_true", help="P1 text format instead of binary P4")

    p = sub.add_parser("bench", help="measure engine throughput (cell updates per second)")
    p.add_argument("--engine", choices=("naive", "packed"), required=True)
    p.add_argument("--radius", type=int, default=1)
    p.add_argument("--size", type=_size, default=(256, 256), metavar="HxW")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--boundary", choices=BOUNDARIES, default="dead")

    return parser


def _cmd_gen_rules(args) -> int:
    radius = (args.neighborhood - 1) // 2
    ruleset = rules.sample_rules(args.count, radius, args.seed)
    io.write_rules_text(args.out, ruleset)
    print(f"wrote {len(ruleset)} rules (n={args.neighborhood}) to {args.out}")
    return 0


def _cmd_simulate(args) -> int:
    rule = rules.parse_notation(args.rule)
    initial = ds.sample_initial(args.height, args.width, args.density, args.seed)
    traj = simulate(rule, initial, args.steps, args.boundary)
    io.write_trajectory(args.out, traj)
    live = traj.states[-1].mean()
    print(f"simulated {rule.notation} for {args.steps} steps "
          f"({args.height}x{args.width}, {args.boundary}); final live fraction {live:.3f}")
    return 0


def _cmd_build_dataset(args) -> int:
    if args.config:
        spec = io.read_spec_config(args.config)
        spec = replace(spec, level=ds.canonical_level(args.level))
    else:
        spec = ds.DatasetSpec(level=ds.canonical_level(args.level))
    built = ds.build(spec, rule_seed=args.rule_seed, config_seed=args.config_seed,
                     workers=args.workers)
    io.write_dataset(args.out, built)
    counts = {s: len(built.splits[s]) for s in ds.SPLITS}
    print(f"built {spec.level} dataset: {counts['train']} train / "
          f"{counts['val']} val / {counts['test']} test samples -> {args.out}")
    trivial = built.stats["trivial_trajectory_fraction"]
    print("trivial trajectories (all-dead/all-alive by t=k): "
          + ", ".join(f"{s} {trivial[s]:.1%}" for s in ds.SPLITS))
    return 0


def _train_live_fraction(dataset: ds.Dataset) -> float:
    samples = dataset.splits["train"]
    if not samples:
        return 0.5
    live = sum(int(s.target.sum()) for s in samples)
    total = sum(s.target.size for s in samples)
    return live / total


def _cmd_eval(args) -> int:
    dataset = io.read_dataset(args.dataset)
    samples = dataset.splits[args.split]
    ruleset = dataset.rules_for(args.split)
    maps = bool(args.error_maps)
    if args.predictions:
        report = evaluation.score_prediction_file(
            args.predictions, samples, ruleset,
            collect_error_maps=maps, workers=args.workers)
    else:
        predictor = predictors.by_name(
            args.predictor, ruleset, dataset.boundary,
            training_live_fraction=_train_live_fraction(dataset))
        report = evaluation.evaluate(
            predictor, samples, ruleset, collect_error_maps=maps,
            workers=args.workers, predictor_name=args.predictor)
    evaluation.write_report(report, args.report, per_rule=args.per_rule)
    if maps:
        os.makedirs(args.error_maps, exist_ok=True)
        for i, m in enumerate(report.error_maps):
            io.render_pbm(m, os.path.join(args.error_maps, f"error_{i:05d}.pbm"))
    print(evaluation.format_report(report, per_rule=args.per_rule))
    return 0


def _transition_pairs(path):
    with open(path, "rb") as f:
        magic = f.read(4)
    if magic == b"CATR":
        traj = io.read_trajectory(path)
        pairs = [(traj.states[t], traj.states[t + 1]) for t in range(traj.steps)]
        return pairs, traj.boundary
    if magic == b"CADS":
        dataset = io.read_dataset(path)
        pairs = [(s.inputs[-1], s.target) for split in ds.SPLITS
                 for s in dataset.splits[split]]
        return pairs, dataset.boundary
    raise io.FormatError(f"unrecognized magic {magic!r} in {path}", offset=0)


def _cmd_infer(args) -> int:
    if args.auto_radius == (args.radius is not None):
        raise UsageError("exactly one of --radius or --auto-radius is required")
    pairs, boundary = _transition_pairs(args.trajectory)
    if not pairs:
        raise io.FormatError("no transitions in input file")
    if args.auto_radius:
        rule, report, radius = inference.infer_smallest_radius(
            pairs, boundary, max_radius=args.max_radius)
        print(f"smallest consistent radius: {radius}")
    else:
        evidence = inference.TransitionEvidence(args.radius)
        for before, after in pairs:
            evidence.observe(before, after, boundary)
        rule, report = inference.infer_rule(evidence)
    print(f"inferred rule: {rule.notation}")
    print(report.describe())
    if args.out:
        io.write_rules_text(args.out, rules.RuleSet([rule], label="inferred"))
    return 0


def _cmd_render(args) -> int:
    traj = io.read_trajectory(args.infile)
    if not 0 <= args.frame < traj.states.shape[0]:
        raise ValueError(
            f"frame {args.frame} out of range (trajectory has {traj.states.shape[0]} states)")
    io.render_pbm(traj.states[args.frame], args.out, ascii_mode=args.ascii)
    print(f"wrote frame {args.frame} to {args.out}")
    return 0


def _cmd_bench(args) -> int:
    height, width = args.size
    rule = rules.sample_rules(1, args.radius, rng_seed=0)[0]
    grid = ds.sample_initial(height, width, 0.5, seed=42)
    fn = step if args.engine == "naive" else step_packed

    def run() -> float:
        state = grid
        t0 = time.perf_counter()
        for _ in range(args.steps):
            state = fn(rule, state, args.boundary)
        return time.perf_counter() - t0

    run()  # warm-up
    times = [run() for _ in range(max(5, args.reps))]
    median = statistics.median(times)
    rate = height * width * args.steps / median
    print(f"engine={args.engine} radius={args.radius} size={height}x{width} "
          f"steps={args.steps} boundary={args.boundary}")
    print(f"rule: {rule.notation}")
    print(f"median {median * 1e3:.2f} ms  ->  {rate:,.0f} cell updates/s")
    print("raw seconds: " + " ".join(f"{t:.4f}" for t in times))
    return 0


class UsageError(Exception):
    pass


_COMMANDS = {
    "gen-rules": _cmd_gen_rules,
    "simulate": _cmd_simulate,
    "build-dataset": _cmd_build_dataset,
    "eval": _cmd_eval,
    "infer": _cmd_infer,
    "render": _cmd_render,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as e:
        print(f"calab: error: {e}", file=sys.stderr)
        return 1
    except inference.InconsistencyError as e:
        print(f"calab: inference inconsistency: {e}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as e:
        print(f"calab: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
