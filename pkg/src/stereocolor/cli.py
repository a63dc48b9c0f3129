"""Command-line interface: distort, correct, evaluate, bench, split.

Exit codes: 0 success, 1 usage error, 2 data error, 3 method error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .config import distortion_ranges, load_config
from .distortion import DistortionOp, apply_distortion, sample_spec, write_sidecar
from .global_transfer import NearSingularCovariance
from .harness import (
    REGISTRY,
    HarnessError,
    Layout,
    Split,
    load_dataset,
    make_timing_probe,
    resolve_method,
    run_benchmark,
    split_dataset,
)
from .io_png import load_image, save_image
from .metrics import DimensionMismatch, TooSmall, psnr, ssim, time_method

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_METHOD = 3

log = logging.getLogger("stereocolor")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _stable_frame_seed(seed: int, scene: str, frame: int) -> int:
    import hashlib

    digest = hashlib.blake2b(f"{seed}:{scene}:{frame}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def _config_from_args(args) -> dict:
    overrides = {}
    if getattr(args, "idt_iterations", None) is not None:
        overrides["idt.iterations"] = args.idt_iterations
    if getattr(args, "idt_bins", None) is not None:
        overrides["idt.bins"] = args.idt_bins
    if getattr(args, "seed", None) is not None:
        overrides["idt.seed"] = args.seed
    if getattr(args, "no_regrain", False):
        overrides["idt.regrain"] = False
    if getattr(args, "repeats", None) is not None:
        overrides["bench.repeats"] = args.repeats
    if getattr(args, "warmup", False):
        overrides["bench.warmup"] = True
    if getattr(args, "probe_size", None) is not None:
        overrides["bench.probe_size"] = args.probe_size
    return load_config(getattr(args, "config", None), overrides)


_OP_ALIASES = {"bc": DistortionOp.BRIGHTNESS_CONTRAST, "gamma": DistortionOp.GAMMA,
               "hsv": DistortionOp.HUE_SATURATION_VALUE}


def cmd_distort(args) -> int:
    config = _config_from_args(args)
    ranges = distortion_ranges(config)
    ops = []
    for token in args.ops.split(","):
        token = token.strip()
        if token not in _OP_ALIASES:
            raise UsageError(f"unknown op {token!r}; choose from {sorted(_OP_ALIASES)}")
        ops.append(_OP_ALIASES[token])

    manifest = load_dataset(args.in_dir)
    if manifest.layout is not Layout.PAIR:
        raise HarnessError("distort expects a pair dataset (left/right only, no ground truth)")

    out_root = Path(args.out_dir)
    for record in manifest.frames():
        frame_seed = _stable_frame_seed(args.seed, record.scene, record.frame)
        op = ops[frame_seed % len(ops)]
        spec = sample_spec(op, frame_seed, ranges)
        left = load_image(record.left)
        right = load_image(record.right)
        scene_dir = out_root / record.scene
        scene_dir.mkdir(parents=True, exist_ok=True)
        save_image(scene_dir / f"{record.frame:04d}_left.png", apply_distortion(left, spec))
        save_image(scene_dir / f"{record.frame:04d}_left_gt.png", left)
        save_image(scene_dir / f"{record.frame:04d}_right.png", right)
        write_sidecar(scene_dir / f"{record.frame:04d}_distortion.txt", spec)
    print(f"distorted {manifest.frame_count} frames into {out_root}")
    return EXIT_OK


def cmd_correct(args) -> int:
    config = _config_from_args(args)
    _, method = resolve_method(args.method, config)
    left = load_image(args.left)
    right = load_image(args.right)
    corrected = method(left, right)
    save_image(args.out, corrected)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = _config_from_args(args)
    manifest = load_dataset(args.data)
    if args.methods:
        methods = [m.strip() for m in args.methods.split(",")]
        ratios = (config["split.train"], config["split.val"], config["split.test"])
        if args.all_test:
            manifest = split_dataset(manifest, (0.0, 0.0, 1.0), config["split.seed"])
        else:
            manifest = split_dataset(manifest, ratios, config["split.seed"])
        report = run_benchmark(manifest, methods, config)
        print(report.to_markdown())
        if args.csv:
            Path(args.csv).write_text(report.to_csv())
            print(f"wrote {args.csv}")
        return EXIT_OK

    if not args.corrected:
        raise UsageError("evaluate needs either --methods or --corrected")
    if manifest.layout is not Layout.TRIPLET:
        raise HarnessError("evaluate needs ground truth (triplet layout)")
    corrected_root = Path(args.corrected)
    psnrs, ssims = [], []
    for record in manifest.frames():
        corrected_path = corrected_root / record.scene / f"{record.frame:04d}_left.png"
        if not corrected_path.exists():
            log.warning("no corrected output for %s/%04d", record.scene, record.frame)
            continue
        corrected = load_image(corrected_path)
        gt = load_image(record.left_gt)
        p, s = psnr(corrected, gt), ssim(corrected, gt)
        psnrs.append(p)
        ssims.append(s)
        print(f"{record.scene}/{record.frame:04d}  PSNR {p:8.4f} dB  SSIM {s:.6f}")
    if not psnrs:
        raise HarnessError(f"no corrected outputs found under {corrected_root}")
    print(f"aggregate over {len(psnrs)} frames: "
          f"PSNR {float(np.mean(psnrs)):.4f} dB  SSIM {float(np.mean(ssims)):.6f}")
    return EXIT_OK


def cmd_bench(args) -> int:
    config = _config_from_args(args)
    methods = [m.strip() for m in args.methods.split(",")]
    probe = make_timing_probe(int(config["bench.probe_size"]))
    repeats = int(config["bench.repeats"])
    warmup = bool(config["bench.warmup"])
    print(f"timing probe: {probe.left.shape[1]}x{probe.left.shape[0]}, min of {repeats} runs")
    for name in methods:
        _, method = resolve_method(name, config)
        elapsed = time_method(method, probe, repeats=repeats, warmup=warmup)
        print(f"{name:16s} {elapsed:10.1f} ms")
    return EXIT_OK


def cmd_split(args) -> int:
    config = _config_from_args(args)
    manifest = load_dataset(args.data)
    ratios = (
        args.train if args.train is not None else config["split.train"],
        args.val if args.val is not None else config["split.val"],
        args.test if args.test is not None else config["split.test"],
    )
    seed = args.seed if args.seed is not None else config["split.seed"]
    manifest = split_dataset(manifest, ratios, seed)
    counts = {split: 0 for split in Split}
    for scene in manifest.scenes:
        split = manifest.split[scene.scene_id]
        counts[split] += scene.frame_count
        print(f"{scene.scene_id}\t{split.value}\t{scene.frame_count} frames")
    summary = ", ".join(f"{split.value}={counts[split]}" for split in Split)
    print(f"frames: {summary}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="stereocolor", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", default=None, help="flat key=value config file")
        p.add_argument("--idt-iterations", type=int, default=None)
        p.add_argument("--idt-bins", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--no-regrain", action="store_true")

    p = sub.add_parser("distort", help="synthesize color mismatches for a pair dataset")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", dest="out_dir", required=True)
    p.add_argument("--ops", default="bc,gamma,hsv", help="comma list of bc,gamma,hsv")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_distort)

    p = sub.add_parser("correct", help="correct one stereo pair")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--method", required=True, choices=sorted(REGISTRY))
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("evaluate", help="evaluate methods or precomputed corrections")
    p.add_argument("--data", required=True, help="triplet dataset root")
    p.add_argument("--methods", default=None, help="comma list of registered methods")
    p.add_argument("--corrected", default=None, help="directory of corrected left views")
    p.add_argument("--csv", default=None, help="write the report as CSV")
    p.add_argument("--all-test", action="store_true",
                   help="treat every scene as TEST instead of splitting")
    add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="time methods on a synthetic 512x512 probe")
    p.add_argument("--methods", default=",".join(sorted(REGISTRY)))
    p.add_argument("--repeats", type=int, default=None)
    p.add_argument("--warmup", action="store_true")
    p.add_argument("--probe-size", type=int, default=None)
    add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("split", help="assign scenes to train/val/test")
    p.add_argument("--data", required=True)
    p.add_argument("--train", type=float, default=None)
    p.add_argument("--val", type=float, default=None)
    p.add_argument("--test", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_split)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HarnessError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NearSingularCovariance, DimensionMismatch, TooSmall) as exc:
        print(f"method error: {exc}", file=sys.stderr)
        return EXIT_METHOD
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
