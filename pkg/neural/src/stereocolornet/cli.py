"""CLI: `train` fits a corrector on a triplet dataset, `infer` corrects one
pair with a saved checkpoint. Config files use flat `key = value` lines."""

from __future__ import annotations

import argparse
import sys

from .data import DatasetError
from .model import CheckpointMismatch
from .train import TrainConfig, train


def parse_config_file(path) -> dict:
    values = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"expected 'key = value', got {raw!r}")
            value = value.strip()
            for caster in (int, float):
                try:
                    value = caster(value)
                    break
                except ValueError:
                    continue
            values[key.strip()] = value
    return values


def cmd_train(args) -> int:
    values = parse_config_file(args.config) if args.config else {}
    if args.steps is not None:
        values["train.steps"] = args.steps
    if args.lr is not None:
        values["train.lr"] = args.lr
    if args.seed is not None:
        values["train.seed"] = args.seed
    config = TrainConfig.from_mapping(values)
    result = train(args.data, config, args.out)
    first, last = result.history[0]["total"], result.history[-1]["total"]
    print(f"trained {config.steps} steps: total loss {first:.4f} -> {last:.4f}")
    print(f"checkpoint: {result.checkpoint}")
    print(f"loss curve: {result.curve_csv}")
    return 0


def cmd_infer(args) -> int:
    from .infer import infer_files

    infer_files(args.ckpt, args.left, args.right, args.out)
    print(f"wrote {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="stereocolornet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a corrector on a triplet dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True, help="checkpoint path to write")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="correct one pair with a checkpoint")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_infer)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (DatasetError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except CheckpointMismatch as exc:
        print(f"checkpoint error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
