"""Triplet dataset access and PNG I/O.

Interop with the benchmark tooling is purely file-based: this package reads
the same `<scene>/<frame:04d>_{left,left_gt,right}.png` layout and writes
plain 8-bit RGB PNGs, never sharing code or process with it.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image


class DatasetError(RuntimeError):
    pass


def load_image(path) -> torch.Tensor:
    """8-bit RGB PNG -> float32 (3, H, W) tensor in [0, 1]."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float32) / 255.0
    return torch.from_numpy(arr).permute(2, 0, 1).contiguous()


def save_image(path, tensor: torch.Tensor) -> None:
    """float (3, H, W) tensor -> 8-bit RGB PNG (round-half-up, clamped)."""
    arr = tensor.detach().clamp(0, 1).permute(1, 2, 0).cpu().numpy()
    quantized = np.floor(arr * 255.0 + 0.5).astype(np.uint8)
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    Image.fromarray(quantized, mode="RGB").save(tmp, format="PNG")
    os.replace(tmp, path)


@dataclass(frozen=True)
class Frame:
    scene: str
    index: int
    left: Path
    left_gt: Path
    right: Path


def list_triplet_frames(root) -> list[Frame]:
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"{root} is not a directory")
    frames = []
    for scene_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for gt in sorted(scene_dir.glob("*_left_gt.png")):
            idx = int(gt.name.split("_")[0])
            left = scene_dir / f"{idx:04d}_left.png"
            right = scene_dir / f"{idx:04d}_right.png"
            if left.exists() and right.exists():
                frames.append(Frame(scene_dir.name, idx, left, gt, right))
    if not frames:
        raise DatasetError(f"no complete triplet frames under {root}")
    return frames


class TripletPatchDataset(torch.utils.data.Dataset):
    """Random aligned crops from triplet frames, sized for the network."""

    def __init__(self, root, patch=64, seed=0):
        if patch % 32:
            raise ValueError("patch size must be divisible by 32")
        self.frames = list_triplet_frames(root)
        self.patch = patch
        self.rng = np.random.default_rng(seed)
        self._cache = {}

    def __len__(self):
        return len(self.frames)

    def _load(self, frame: Frame):
        if frame not in self._cache:
            self._cache[frame] = (
                load_image(frame.left),
                load_image(frame.left_gt),
                load_image(frame.right),
            )
        return self._cache[frame]

    def __getitem__(self, index):
        left, gt, right = self._load(self.frames[index])
        _, h, w = left.shape
        if h < self.patch or w < self.patch:
            raise DatasetError(
                f"frame {self.frames[index].scene}/{self.frames[index].index} "
                f"is smaller than the {self.patch}px patch"
            )
        top = int(self.rng.integers(0, h - self.patch + 1))
        lead = int(self.rng.integers(0, w - self.patch + 1))
        sl = (slice(None), slice(top, top + self.patch), slice(lead, lead + self.patch))
        return left[sl], gt[sl], right[sl]
