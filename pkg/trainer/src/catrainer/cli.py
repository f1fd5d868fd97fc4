"""catrainer: train on CADS datasets, export CAPR predictions.

`train` consumes a CADS file (train + val splits), writes best.pt and
history.csv; `predict` loads a checkpoint and writes a float32 CAPR file
for one split, ready for the laboratory's evaluator.
"""

from __future__ import annotations

import argparse
import sys

from .formats import read_cads, read_spec_config
from .model import ModelConfig
from .training import predict_to_file, train


def build_parser():
    parser = argparse.ArgumentParser(prog="catrainer", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train on a CADS dataset")
    p.add_argument("--dataset", required=True, help="CADS file")
    p.add_argument("--out-dir", required=True, help="checkpoint + history directory")
    p.add_argument("--spec", help="DatasetSpec config; cross-checked against the CADS header")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--lr", type=float, default=0.0001,
                   help="Adam learning rate (reference value 0.0001)")
    p.add_argument("--base-filters", type=int, default=32)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-short-skips", action="store_true",
                   help="disable residual shortcuts inside blocks")
    p.add_argument("--no-long-skip", action="store_true",
                   help="disable the input-to-decoder concatenation")
    p.add_argument("--device", default="cpu")
    p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("predict", help="write CAPR predictions for one split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", choices=("train", "val", "test"), default="test")
    p.add_argument("--out", required=True)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--device", default="cpu")
    return parser


def _cmd_train(args) -> int:
    data = read_cads(args.dataset)
    if args.spec:
        spec = read_spec_config(args.spec)
        declared = (int(spec.get("k", data.k)), int(spec.get("grid_height", data.height)),
                    int(spec.get("grid_width", data.width)))
        if declared != (data.k, data.height, data.width):
            print(f"catrainer: spec {declared} does not match dataset "
                  f"({data.k}, {data.height}, {data.width})", file=sys.stderr)
            return 2
    config = ModelConfig(
        k_inputs=data.k,
        base_filters=args.base_filters,
        short_range_residual=not args.no_short_skips,
        long_range_concat=not args.no_long_skip,
        latent_dropout_rate=args.dropout,
        learning_rate=args.lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed,
    )
    log = None if args.quiet else print
    result = train(data.splits, config, args.out_dir, data.height, data.width,
                   device=args.device, log=log)
    print(f"best epoch {result.best_epoch} (val loss {result.best_val_loss:.4f}) "
          f"-> {result.checkpoint_path}")
    return 0


def _cmd_predict(args) -> int:
    count = predict_to_file(args.checkpoint, args.dataset, args.split, args.out,
                            batch_size=args.batch_size, device=args.device)
    print(f"wrote {count} probability frames to {args.out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            return _cmd_train(args)
        return _cmd_predict(args)
    except (ValueError, OSError) as e:
        print(f"catrainer: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
