"""Full-reference quality metrics (PSNR, SSIM) and the timing protocol."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .imaging import Stereopair, ensure_image, luma

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_DYNAMIC_RANGE = 1.0


class DimensionMismatch(ValueError):
    """Compared images must have identical shapes."""


class TooSmall(ValueError):
    """Image is smaller than the SSIM window."""


@dataclass(frozen=True)
class MetricsReport:
    psnr_db: float
    ssim: float
    elapsed_ms: float | None = None


def _check_shapes(a: np.ndarray, b: np.ndarray):
    a = ensure_image(a)
    b = ensure_image(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    return a, b


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB over all RGB samples jointly.

    Samples are on the [0, 1] scale, so the peak is 1. Identical inputs
    return +inf.
    """
    a, b = _check_shapes(a, b)
    # Extended-precision accumulation keeps closed-form cases (constant
    # difference) exact regardless of image size.
    mse = float(np.mean((a - b) ** 2, dtype=np.longdouble))
    if mse == 0:
        return math.inf
    return float(-10.0 * math.log10(mse))


def gaussian_kernel_1d(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    offsets = np.arange(size) - (size - 1) / 2.0
    kernel = np.exp(-(offsets**2) / (2.0 * sigma**2))
    return kernel / kernel.sum()


def _windowed_mean(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # Separable filtering, cropped to fully interior (valid) windows.
    half = len(kernel) // 2
    smoothed = correlate1d(img, kernel, axis=0, mode="constant")
    smoothed = correlate1d(smoothed, kernel, axis=1, mode="constant")
    return smoothed[half:-half, half:-half]


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean structural similarity on Rec. 601 luma.

    Gaussian 11x11 window with sigma 1.5, K1=0.01, K2=0.03, dynamic range 1,
    single scale, no downsampling; only fully interior windows contribute.
    """
    a, b = _check_shapes(a, b)
    if min(a.shape[0], a.shape[1]) < SSIM_WINDOW:
        raise TooSmall(f"SSIM needs at least {SSIM_WINDOW} pixels per side, got {a.shape[:2]}")
    x = luma(a)
    y = luma(b)
    kernel = gaussian_kernel_1d()

    mu_x = _windowed_mean(x, kernel)
    mu_y = _windowed_mean(y, kernel)
    var_x = _windowed_mean(x * x, kernel) - mu_x**2
    var_y = _windowed_mean(y * y, kernel) - mu_y**2
    cov_xy = _windowed_mean(x * y, kernel) - mu_x * mu_y

    c1 = (SSIM_K1 * SSIM_DYNAMIC_RANGE) ** 2
    c2 = (SSIM_K2 * SSIM_DYNAMIC_RANGE) ** 2
    ssim_map = ((2 * mu_x * mu_y + c1) * (2 * cov_xy + c2)) / (
        (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
    )
    return float(ssim_map.mean())


def time_method(method, pair: Stereopair, repeats: int = 3, warmup: bool = False) -> float:
    """Shortest wall-clock time in ms for `method(left, right)` over `repeats` runs.

    File I/O is excluded by construction (the pair is already in memory).
    An optional extra warm-up run is discarded before measuring.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if warmup:
        method(pair.left, pair.right)
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        method(pair.left, pair.right)
        elapsed = (time.perf_counter() - start) * 1000.0
        best = min(best, elapsed)
    return best
