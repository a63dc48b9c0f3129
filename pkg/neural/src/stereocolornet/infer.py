"""Inference: pad to a multiple of 32, run the network, crop, write PNG."""

from __future__ import annotations

import torch
import torch.nn.functional as F

from .data import load_image, save_image
from .model import ColorCorrectionNet, load_checkpoint


def pad_to_multiple(img: torch.Tensor, multiple=32):
    """Reflect-pad (B, C, H, W) so both spatial dims divide `multiple`."""
    h, w = img.shape[-2:]
    pad_h = (multiple - h % multiple) % multiple
    pad_w = (multiple - w % multiple) % multiple
    padded = F.pad(img, (0, pad_w, 0, pad_h), mode="reflect")
    return padded, (h, w)


@torch.no_grad()
def correct_pair(model: ColorCorrectionNet, left: torch.Tensor, right: torch.Tensor):
    """left, right (3, H, W) -> corrected (3, H, W), clamped to [0, 1]."""
    model.eval()
    batch_left, size = pad_to_multiple(left.unsqueeze(0))
    batch_right, _ = pad_to_multiple(right.unsqueeze(0))
    corrected, _ = model(batch_left, batch_right)
    h, w = size
    return corrected[0, :, :h, :w].clamp(0, 1)


def infer_files(checkpoint_path, left_path, right_path, out_path):
    model = load_checkpoint(checkpoint_path)
    left = load_image(left_path)
    right = load_image(right_path)
    corrected = correct_pair(model, left, right)
    save_image(out_path, corrected)
    return corrected
