"""Image buffers, sRGB/CIELAB conversion, and color-moment statistics.

Images are numpy arrays of shape (height, width, 3) holding floating-point
samples, nominally in [0, 1] for RGB data. All conversions assume sRGB
primaries with the D65 white point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# sRGB (linear) -> CIE XYZ, D65 white point.
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)
_D65_WHITE = np.array([0.95047, 1.0, 1.08883])

_LAB_EPS = 216.0 / 24389.0
_LAB_KAPPA = 24389.0 / 27.0

# Rec. 601 luma weights.
_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def ensure_image(img: np.ndarray) -> np.ndarray:
    """Validate an image buffer and return it as float64.

    Raises ValueError unless `img` has shape (H, W, 3) with H, W >= 1.
    """
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"image dimensions must be at least 1x1, got {arr.shape[:2]}")
    return arr.astype(np.float64, copy=False)


def clamp01(img: np.ndarray) -> np.ndarray:
    """Clip all samples to [0, 1]."""
    return np.clip(img, 0.0, 1.0)


def luma(img: np.ndarray) -> np.ndarray:
    """Rec. 601 luma of an RGB image, shape (H, W)."""
    return ensure_image(img) @ _LUMA_WEIGHTS


@dataclass(frozen=True)
class Stereopair:
    """Left and right views of a stereoscopic image, plus optional ground truth.

    The left view is the one to correct; `gt_left` is the undistorted left
    view when known (synthetic distortions, beam-splitter captures).
    """

    left: np.ndarray
    right: np.ndarray
    gt_left: np.ndarray | None = None

    def __post_init__(self):
        left = ensure_image(self.left)
        right = ensure_image(self.right)
        if left.shape != right.shape:
            raise ValueError(
                f"left and right views must have identical dimensions, "
                f"got {left.shape} and {right.shape}"
            )
        if self.gt_left is not None:
            gt = ensure_image(self.gt_left)
            if gt.shape != left.shape:
                raise ValueError(
                    f"gt_left must match the views' dimensions, "
                    f"got {gt.shape} vs {left.shape}"
                )


@dataclass(frozen=True)
class ColorStats:
    """Per-image color moments: mean vector, covariance matrix, channel stds."""

    mean: np.ndarray
    cov: np.ndarray
    std: np.ndarray

    @classmethod
    def from_moments(cls, mean: np.ndarray, cov: np.ndarray) -> "ColorStats":
        mean = np.asarray(mean, dtype=np.float64)
        cov = np.asarray(cov, dtype=np.float64)
        cov = 0.5 * (cov + cov.T)
        return cls(mean=mean, cov=cov, std=np.sqrt(np.diag(cov)))


def compute_stats(img: np.ndarray) -> ColorStats:
    """Mean, population covariance (1/N), and per-channel std over all pixels.

    Uses the 1/N normalization so a constant image has exactly zero
    covariance.
    """
    pixels = ensure_image(img).reshape(-1, 3)
    mean = pixels.mean(axis=0)
    centered = pixels - mean
    cov = centered.T @ centered / pixels.shape[0]
    return ColorStats.from_moments(mean, cov)


def _srgb_decode(encoded: np.ndarray) -> np.ndarray:
    # Odd-symmetric extension keeps out-of-gamut values invertible.
    x = np.abs(encoded)
    linear = np.where(x <= 0.04045, x / 12.92, ((x + 0.055) / 1.055) ** 2.4)
    return np.copysign(linear, encoded)


def _srgb_encode(linear: np.ndarray) -> np.ndarray:
    x = np.abs(linear)
    encoded = np.where(x <= 0.0031308, x * 12.92, 1.055 * x ** (1.0 / 2.4) - 0.055)
    return np.copysign(encoded, linear)


def rgb_to_lab(img: np.ndarray) -> np.ndarray:
    """Convert sRGB samples in [0, 1] to CIELAB (L in [0, 100])."""
    rgb = ensure_image(img)
    xyz = _srgb_decode(rgb) @ _RGB_TO_XYZ.T
    t = xyz / _D65_WHITE
    f = np.where(t > _LAB_EPS, np.cbrt(t), (_LAB_KAPPA * t + 16.0) / 116.0)
    fx, fy, fz = f[..., 0], f[..., 1], f[..., 2]
    lab = np.empty_like(rgb)
    lab[..., 0] = 116.0 * fy - 16.0
    lab[..., 1] = 500.0 * (fx - fy)
    lab[..., 2] = 200.0 * (fy - fz)
    return lab


def lab_to_rgb(img: np.ndarray, clamp: bool = True) -> np.ndarray:
    """Convert CIELAB back to sRGB; out-of-gamut values clamp to [0, 1].

    Pass clamp=False to keep out-of-gamut values (diagnostics only).
    """
    lab = ensure_image(img)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    f = np.stack([fx, fy, fz], axis=-1)
    t = np.where(f**3 > _LAB_EPS, f**3, (116.0 * f - 16.0) / _LAB_KAPPA)
    rgb = _srgb_encode(t * _D65_WHITE @ _XYZ_TO_RGB.T)
    return clamp01(rgb) if clamp else rgb
