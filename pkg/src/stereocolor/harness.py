"""Dataset loading, deterministic splits, the method registry, and the
benchmark that produces one report row per correction method."""

from __future__ import annotations

import hashlib
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from pathlib import Path

import numpy as np

from . import idt as idt_mod
from .global_transfer import (
    Decomposition,
    pitie_linear_transfer,
    reinhard_transfer,
    xiao_transfer,
)
from .imaging import Stereopair
from .io_png import load_image, save_image
from .metrics import psnr, ssim, time_method

log = logging.getLogger("stereocolor")

THREADS_ENV_VAR = "STEREOCOLOR_THREADS"


class HarnessError(Exception):
    pass


class EmptyDataset(HarnessError):
    pass


class MixedLayout(HarnessError):
    pass


class TooFewScenes(HarnessError):
    pass


class Layout(Enum):
    TRIPLET = "triplet"  # left (distorted), left_gt, right
    PAIR = "pair"  # left, right


class Split(Enum):
    TRAIN = "train"
    VAL = "val"
    TEST = "test"


@dataclass(frozen=True)
class FrameRecord:
    scene: str
    frame: int
    left: Path
    right: Path
    left_gt: Path | None = None


@dataclass(frozen=True)
class SceneInfo:
    scene_id: str
    frames: tuple[int, ...]

    @property
    def frame_count(self) -> int:
        return len(self.frames)


@dataclass(frozen=True)
class DatasetManifest:
    root: Path
    layout: Layout
    scenes: tuple[SceneInfo, ...]
    split: dict = field(default_factory=dict)  # scene_id -> Split
    skipped: tuple[str, ...] = ()

    @property
    def frame_count(self) -> int:
        return sum(s.frame_count for s in self.scenes)

    def frame_record(self, scene_id: str, frame: int) -> FrameRecord:
        scene_dir = self.root / scene_id
        gt = scene_dir / f"{frame:04d}_left_gt.png"
        return FrameRecord(
            scene=scene_id,
            frame=frame,
            left=scene_dir / f"{frame:04d}_left.png",
            right=scene_dir / f"{frame:04d}_right.png",
            left_gt=gt if self.layout is Layout.TRIPLET else None,
        )

    def frames(self, split: Split | None = None) -> list[FrameRecord]:
        records = []
        for scene in self.scenes:
            if split is not None and self.split.get(scene.scene_id) != split:
                continue
            records.extend(self.frame_record(scene.scene_id, f) for f in scene.frames)
        return records


def load_dataset(root) -> DatasetManifest:
    """Scan `root/<scene>/<frame:04d>_{left,left_gt,right}.png` into a manifest.

    Incomplete frames are skipped with a warning; a dataset mixing triplet
    and pair scenes is an error.
    """
    root = Path(root)
    if not root.is_dir():
        raise EmptyDataset(f"dataset root {root} is not a directory")

    scenes = []
    skipped = []
    layouts = set()
    for scene_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        stems = {p.name for p in scene_dir.glob("*.png")}
        frame_ids = sorted(
            {int(name.split("_")[0]) for name in stems if name.split("_")[0].isdigit()}
        )
        if not frame_ids:
            continue
        has_gt = any(name.endswith("_left_gt.png") for name in stems)
        layout = Layout.TRIPLET if has_gt else Layout.PAIR
        layouts.add(layout)

        complete = []
        for frame in frame_ids:
            needed = [f"{frame:04d}_left.png", f"{frame:04d}_right.png"]
            if layout is Layout.TRIPLET:
                needed.append(f"{frame:04d}_left_gt.png")
            missing = [n for n in needed if n not in stems]
            if missing:
                skipped.append(f"{scene_dir.name}/{frame:04d} (missing {', '.join(missing)})")
            else:
                complete.append(frame)
        if complete:
            scenes.append(SceneInfo(scene_id=scene_dir.name, frames=tuple(complete)))

    if len(layouts) > 1:
        raise MixedLayout(f"dataset mixes triplet and pair scenes under {root}")
    if not scenes:
        raise EmptyDataset(f"no complete frames found under {root}")
    for entry in skipped:
        log.warning("skipping incomplete frame %s", entry)
    return DatasetManifest(
        root=root, layout=layouts.pop(), scenes=tuple(scenes), skipped=tuple(skipped)
    )


def _scene_rank_key(scene_id: str, seed: int) -> str:
    return hashlib.blake2b(f"{seed}:{scene_id}".encode(), digest_size=16).hexdigest()


def split_dataset(manifest: DatasetManifest, ratios, seed: int = 0) -> DatasetManifest:
    """Deterministic scene-level split into train/val/test.

    Scenes are ordered by a seed-keyed hash and assigned greedily to the
    split with the largest remaining frame deficit, so realized frame counts
    match the ratios to within one scene.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3:
        raise ValueError("ratios must be (train, val, test)")
    if any(r < 0 for r in ratios):
        raise ValueError("ratios must be non-negative")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)}")
    nonzero = sum(1 for r in ratios if r > 0)
    if len(manifest.scenes) < nonzero:
        raise TooFewScenes(
            f"{len(manifest.scenes)} scenes cannot populate {nonzero} non-empty splits"
        )

    total_frames = manifest.frame_count
    targets = [r * total_frames for r in ratios]
    assigned = [0, 0, 0]
    order = sorted(manifest.scenes, key=lambda s: _scene_rank_key(s.scene_id, seed))
    split_of = {}
    classes = (Split.TRAIN, Split.VAL, Split.TEST)
    for scene in order:
        deficits = [targets[i] - assigned[i] if ratios[i] > 0 else -math.inf for i in range(3)]
        choice = max(range(3), key=lambda i: (deficits[i], -i))
        split_of[scene.scene_id] = classes[choice]
        assigned[choice] += scene.frame_count
    return DatasetManifest(
        root=manifest.root,
        layout=manifest.layout,
        scenes=manifest.scenes,
        split=split_of,
        skipped=manifest.skipped,
    )


# --- method registry ---------------------------------------------------


@dataclass(frozen=True)
class MethodEntry:
    name: str
    kind: str  # "global" or "local"
    factory: object  # config dict -> callable(left, right) -> corrected


def _idt_from_config(config: dict):
    idt_config = idt_mod.IdtConfig(
        iterations=int(config.get("idt.iterations", 20)),
        bins=int(config.get("idt.bins", 300)),
        seed=int(config.get("idt.seed", 0)),
        regrain=bool(config.get("idt.regrain", True)),
        regrain_strength=float(config.get("idt.regrain_strength", 1.0)),
    )
    return partial(idt_mod.idt_transfer, config=idt_config)


REGISTRY = {
    "reinhard": MethodEntry("reinhard", "global", lambda config: reinhard_transfer),
    "xiao": MethodEntry("xiao", "global", lambda config: xiao_transfer),
    "pitie-cholesky": MethodEntry(
        "pitie-cholesky",
        "global",
        lambda config: partial(pitie_linear_transfer, decomposition=Decomposition.CHOLESKY),
    ),
    "pitie-sqrt": MethodEntry(
        "pitie-sqrt",
        "global",
        lambda config: partial(pitie_linear_transfer, decomposition=Decomposition.SQRT),
    ),
    "pitie-mk": MethodEntry(
        "pitie-mk",
        "global",
        lambda config: partial(
            pitie_linear_transfer, decomposition=Decomposition.MONGE_KANTOROVITCH
        ),
    ),
    "pitie-idt": MethodEntry("pitie-idt", "local", _idt_from_config),
}


def resolve_method(name: str, config: dict):
    try:
        entry = REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(REGISTRY))
        raise ValueError(f"unknown method {name!r}; known methods: {known}") from None
    return entry, entry.factory(config)


def max_workers() -> int:
    limit = os.environ.get(THREADS_ENV_VAR)
    if limit:
        return max(1, int(limit))
    return max(1, os.cpu_count() or 1)


# --- benchmark ---------------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    method_name: str
    method_type: str
    time_ms: float
    psnr_mean: float
    ssim_mean: float
    dataset_name: str
    frames_evaluated: int
    frames_failed: int


@dataclass(frozen=True)
class EvaluationReport:
    rows: tuple[ReportRow, ...]

    CSV_HEADER = "method,type,time_ms,psnr_mean,ssim_mean,dataset,frames,failures"

    def to_csv(self, include_timing: bool = True) -> str:
        lines = [self.CSV_HEADER if include_timing else self.CSV_HEADER.replace("time_ms,", "")]
        for row in self.rows:
            cells = [
                row.method_name,
                row.method_type,
                f"{row.time_ms:.1f}" if include_timing else None,
                f"{row.psnr_mean:.4f}",
                f"{row.ssim_mean:.6f}",
                row.dataset_name,
                str(row.frames_evaluated),
                str(row.frames_failed),
            ]
            lines.append(",".join(c for c in cells if c is not None))
        return "\n".join(lines) + "\n"

    def to_markdown(self) -> str:
        header = ["Method", "Type", "Time, ms", "PSNR", "SSIM"]
        body = [
            [
                row.method_name,
                row.method_type.capitalize(),
                f"{row.time_ms:,.0f}",
                f"{row.psnr_mean:.4f}",
                f"{row.ssim_mean:.6f}",
            ]
            for row in self.rows
        ]
        widths = [max(len(header[i]), *(len(r[i]) for r in body)) if body else len(header[i])
                  for i in range(len(header))]
        def fmt(cells):
            return "| " + " | ".join(c.ljust(widths[i]) for i, c in enumerate(cells)) + " |"
        lines = [fmt(header), "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
        lines.extend(fmt(r) for r in body)
        return "\n".join(lines) + "\n"


def make_timing_probe(size: int = 512, seed: int = 2024) -> Stereopair:
    """Deterministic smooth 512x512-style stereo pair for timing runs."""
    rng = np.random.default_rng(seed)
    base = rng.random((size // 8 + 2, size // 8 + 2, 3))
    up = np.kron(base, np.ones((8, 8, 1)))[:size, :size, :]
    left = 0.15 + 0.7 * up
    right = np.roll(left, 4, axis=1)
    return Stereopair(left=left, right=right)


def run_benchmark(manifest: DatasetManifest, methods: list, config: dict) -> EvaluationReport:
    """Correct every TEST frame with every method and aggregate PSNR/SSIM.

    Timing comes from a min-of-N run on a synthetic probe, measured serially.
    Frames a method fails on are skipped and counted.
    """
    if manifest.layout is not Layout.TRIPLET:
        raise HarnessError("benchmark needs a triplet dataset (ground truth required)")
    test_frames = manifest.frames(Split.TEST)
    if not test_frames:
        raise HarnessError("TEST split is empty; run split_dataset first")

    resolved = [resolve_method(name, config) for name in methods]
    dataset_name = manifest.root.name

    probe = make_timing_probe(int(config.get("bench.probe_size", 512)))
    repeats = int(config.get("bench.repeats", 3))
    warmup = bool(config.get("bench.warmup", False))

    loaded = []
    for record in test_frames:
        loaded.append(
            (
                record,
                load_image(record.left),
                load_image(record.right),
                load_image(record.left_gt),
            )
        )

    rows = []
    for (entry, method) in resolved:
        def evaluate_frame(item):
            record, left, right, gt = item
            try:
                corrected = method(left, right)
            except Exception as exc:
                log.warning("%s failed on %s/%04d: %s", entry.name, record.scene, record.frame, exc)
                return None
            return psnr(corrected, gt), ssim(corrected, gt)

        with ThreadPoolExecutor(max_workers=max_workers()) as pool:
            results = list(pool.map(evaluate_frame, loaded))
        scores = [r for r in results if r is not None]
        failed = len(results) - len(scores)
        time_ms = time_method(method, probe, repeats=repeats, warmup=warmup)
        psnr_mean = float(np.mean([s[0] for s in scores])) if scores else math.nan
        ssim_mean = float(np.mean([s[1] for s in scores])) if scores else math.nan
        rows.append(
            ReportRow(
                method_name=entry.name,
                method_type=entry.kind,
                time_ms=time_ms,
                psnr_mean=psnr_mean,
                ssim_mean=ssim_mean,
                dataset_name=dataset_name,
                frames_evaluated=len(scores),
                frames_failed=failed,
            )
        )
    return EvaluationReport(rows=tuple(rows))


def correct_single(left_path, right_path, method_name: str, out_path, config: dict | None = None):
    """Correct one stereo pair from files and write the corrected left view."""
    config = config or {}
    _, method = resolve_method(method_name, config)
    left = load_image(left_path)
    right = load_image(right_path)
    corrected = method(left, right)
    save_image(out_path, corrected)
