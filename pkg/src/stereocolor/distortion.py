"""Deterministic synthetic color mismatches for the left view of a stereopair.

Three operators are provided: brightness/contrast, gamma, and
hue/saturation/value. Parameter sampling is integer-seeded so any distorted
dataset can be regenerated byte-for-byte; every output carries a sidecar
text file with the exact operator and parameters used.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .imaging import Stereopair, clamp01, ensure_image


class DistortionOp(Enum):
    BRIGHTNESS_CONTRAST = "bc"
    GAMMA = "gamma"
    HUE_SATURATION_VALUE = "hsv"


_REQUIRED_PARAMS = {
    DistortionOp.BRIGHTNESS_CONTRAST: ("brightness", "contrast"),
    DistortionOp.GAMMA: ("gamma",),
    DistortionOp.HUE_SATURATION_VALUE: ("hue_shift", "sat_scale", "val_scale"),
}


@dataclass(frozen=True)
class DistortionSpec:
    """One synthetic distortion: operator, exact parameters, and the seed
    they were sampled with."""

    op: DistortionOp
    params: Mapping[str, float]
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))
        missing = [k for k in _REQUIRED_PARAMS[self.op] if k not in self.params]
        if missing:
            raise ValueError(f"{self.op.value} spec is missing params: {missing}")
        if self.op is DistortionOp.GAMMA and self.params["gamma"] <= 0:
            raise ValueError("gamma must be positive")
        if self.op is DistortionOp.HUE_SATURATION_VALUE:
            if self.params["sat_scale"] < 0 or self.params["val_scale"] < 0:
                raise ValueError("saturation/value scales must be non-negative")


def apply_brightness_contrast(img: np.ndarray, brightness: float, contrast: float) -> np.ndarray:
    """out = clamp((img - 0.5) * (1 + contrast) + 0.5 + brightness)."""
    img = ensure_image(img)
    gain = 1.0 + contrast
    bias = brightness + 0.5 - 0.5 * gain
    return clamp01(img * gain + bias)


def apply_gamma(img: np.ndarray, gamma: float) -> np.ndarray:
    """Per-sample power curve; gamma=1 is the identity."""
    img = ensure_image(img)
    return np.power(img, gamma)


def rgb_to_hsv(img: np.ndarray) -> np.ndarray:
    """RGB [0,1] to HSV with hue in degrees [0, 360)."""
    img = ensure_image(img)
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    maxc = img.max(axis=-1)
    minc = img.min(axis=-1)
    delta = maxc - minc
    safe_delta = np.where(delta > 0, delta, 1.0)

    hue = np.zeros_like(maxc)
    is_r = (maxc == r) & (delta > 0)
    is_g = (maxc == g) & (delta > 0) & ~is_r
    is_b = (delta > 0) & ~is_r & ~is_g
    hue = np.where(is_r, ((g - b) / safe_delta) % 6.0, hue)
    hue = np.where(is_g, (b - r) / safe_delta + 2.0, hue)
    hue = np.where(is_b, (r - g) / safe_delta + 4.0, hue)
    hue = hue * 60.0

    sat = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)
    return np.stack([hue, sat, maxc], axis=-1)


def hsv_to_rgb(img: np.ndarray) -> np.ndarray:
    """HSV (hue in degrees) back to RGB [0,1]."""
    img = ensure_image(img)
    hue = (img[..., 0] % 360.0) / 60.0
    sat = img[..., 1]
    val = img[..., 2]
    chroma = val * sat
    x = chroma * (1.0 - np.abs(hue % 2.0 - 1.0))
    base = val - chroma

    sector = np.floor(hue).astype(int) % 6
    r = np.choose(sector, [chroma, x, np.zeros_like(x), np.zeros_like(x), x, chroma])
    g = np.choose(sector, [x, chroma, chroma, x, np.zeros_like(x), np.zeros_like(x)])
    b = np.choose(sector, [np.zeros_like(x), np.zeros_like(x), x, chroma, chroma, x])
    return np.stack([r + base, g + base, b + base], axis=-1)


def apply_hsv_shift(
    img: np.ndarray, hue_shift: float, sat_scale: float, val_scale: float
) -> np.ndarray:
    """Rotate hue by degrees and scale saturation/value with clamping."""
    hsv = rgb_to_hsv(img)
    hsv[..., 0] = (hsv[..., 0] + hue_shift) % 360.0
    hsv[..., 1] = np.clip(hsv[..., 1] * sat_scale, 0.0, 1.0)
    hsv[..., 2] = np.clip(hsv[..., 2] * val_scale, 0.0, 1.0)
    return hsv_to_rgb(hsv)


def apply_distortion(img: np.ndarray, spec: DistortionSpec) -> np.ndarray:
    p = spec.params
    if spec.op is DistortionOp.BRIGHTNESS_CONTRAST:
        return apply_brightness_contrast(img, p["brightness"], p["contrast"])
    if spec.op is DistortionOp.GAMMA:
        return apply_gamma(img, p["gamma"])
    return apply_hsv_shift(img, p["hue_shift"], p["sat_scale"], p["val_scale"])


def synthesize(pair: Stereopair, spec: DistortionSpec) -> Stereopair:
    """Distort the left view only; the original left becomes the ground truth."""
    if pair.gt_left is not None:
        raise ValueError("pair already carries a ground-truth left view")
    return Stereopair(
        left=apply_distortion(pair.left, spec),
        right=pair.right,
        gt_left=pair.left,
    )


def _stable_seed(*parts) -> int:
    digest = hashlib.blake2b(":".join(str(p) for p in parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def sample_spec(op: DistortionOp, seed: int, ranges: Mapping[str, float]) -> DistortionSpec:
    """Draw one parameter set uniformly from the configured ranges.

    The draw depends only on (op, seed) and the ranges, so regenerating a
    dataset with the same seed reproduces it exactly on any platform.
    """
    rng = np.random.default_rng(_stable_seed("distort", op.value, seed))

    def draw(lo_key, hi_key):
        return float(rng.uniform(ranges[lo_key], ranges[hi_key]))

    if op is DistortionOp.BRIGHTNESS_CONTRAST:
        params = {
            "brightness": draw("brightness_min", "brightness_max"),
            "contrast": draw("contrast_min", "contrast_max"),
        }
    elif op is DistortionOp.GAMMA:
        params = {"gamma": draw("gamma_min", "gamma_max")}
    else:
        params = {
            "hue_shift": draw("hue_min", "hue_max"),
            "sat_scale": draw("sat_min", "sat_max"),
            "val_scale": draw("val_min", "val_max"),
        }
    return DistortionSpec(op=op, params=params, seed=seed)


def write_sidecar(path, spec: DistortionSpec) -> None:
    lines = [f"op = {spec.op.value}", f"seed = {spec.seed}"]
    for key in sorted(spec.params):
        lines.append(f"{key} = {spec.params[key]!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_sidecar(path) -> DistortionSpec:
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    op = DistortionOp(values.pop("op"))
    seed = int(values.pop("seed"))
    params = {k: float(v) for k, v in values.items()}
    return DistortionSpec(op=op, params=params, seed=seed)
