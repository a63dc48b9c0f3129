"""8-bit RGB PNG input/output.

Files convert to floating point by /255 on load and back with
round-half-up on save; that is the only quantization in the pipeline.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from PIL import Image

from .imaging import clamp01, ensure_image


def load_image(path) -> np.ndarray:
    """Read an 8-bit RGB PNG into a float64 (H, W, 3) array in [0, 1]."""
    with Image.open(path) as im:
        rgb = im.convert("RGB")
        arr = np.asarray(rgb, dtype=np.float64) / 255.0
    return arr


def save_image(path, img: np.ndarray) -> None:
    """Write an image as 8-bit RGB PNG, clamping to [0, 1] first.

    Writes via a temporary file and renames, so a failed save never leaves
    a partial output behind.
    """
    arr = clamp01(ensure_image(img))
    quantized = np.floor(arr * 255.0 + 0.5).astype(np.uint8)
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    Image.fromarray(quantized, mode="RGB").save(tmp, format="PNG")
    os.replace(tmp, path)
