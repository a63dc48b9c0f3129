"""Training loop: Adam over random triplet patches, loss-curve CSV, and a
checkpoint the inference CLI can reload."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .data import TripletPatchDataset
from .losses import DEFAULT_WEIGHTS, compute_losses
from .model import ColorCorrectionNet, save_checkpoint

LOSS_NAMES = ("l1", "l2", "ssim_loss", "photometric", "smoothness", "cycle")


@dataclass
class TrainConfig:
    steps: int = 500
    lr: float = 1e-4
    batch_size: int = 4
    patch: int = 64
    seed: int = 0
    channels: tuple = (16, 32, 48, 64, 80, 96)
    valid_threshold: float = 0.1
    loss_weights: tuple = DEFAULT_WEIGHTS

    @classmethod
    def from_mapping(cls, values: dict) -> "TrainConfig":
        config = cls()
        for key, value in values.items():
            name = key.split(".", 1)[-1]
            if not hasattr(config, name):
                continue
            if name == "channels" and isinstance(value, str):
                value = tuple(int(v) for v in value.split(","))
            if name == "loss_weights" and isinstance(value, str):
                value = tuple(float(v) for v in value.split(","))
            setattr(config, name, value)
        return config


@dataclass
class TrainResult:
    checkpoint: Path
    curve_csv: Path
    history: list = field(default_factory=list)  # dicts of step -> losses


def train(data_dir, config: TrainConfig, out_checkpoint) -> TrainResult:
    torch.manual_seed(config.seed)
    dataset = TripletPatchDataset(data_dir, patch=config.patch, seed=config.seed)
    order_rng = np.random.default_rng(config.seed + 1)

    model = ColorCorrectionNet(config.channels, config.valid_threshold)
    model.train()
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)

    out_checkpoint = Path(out_checkpoint)
    out_checkpoint.parent.mkdir(parents=True, exist_ok=True)
    curve_path = out_checkpoint.with_suffix(".losses.csv")

    history = []
    for step in range(config.steps):
        indices = order_rng.integers(0, len(dataset), size=config.batch_size)
        samples = [dataset[int(i)] for i in indices]
        left = torch.stack([s[0] for s in samples])
        gt = torch.stack([s[1] for s in samples])
        right = torch.stack([s[2] for s in samples])

        corrected, attention = model(left, right)
        bundle = compute_losses(corrected, gt, attention, config.loss_weights)
        total = bundle.total

        optimizer.zero_grad()
        total.backward()
        optimizer.step()

        row = {"step": step, "total": float(total.detach())}
        row.update(
            {name: float(term.detach()) for name, term in zip(LOSS_NAMES, bundle.terms())}
        )
        history.append(row)

    with open(curve_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["step", "total", *LOSS_NAMES])
        writer.writeheader()
        writer.writerows(history)

    model.eval()
    save_checkpoint(out_checkpoint, model, extra={"steps": config.steps, "lr": config.lr})
    return TrainResult(checkpoint=out_checkpoint, curve_csv=curve_path, history=history)
