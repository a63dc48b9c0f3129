"""Global color-correction methods: one linear map applied to every pixel.

Three families are implemented:

* per-channel mean/std matching in CIELAB (``reinhard_transfer``),
* covariance matching via eigenvector rotation in RGB (``xiao_transfer``),
* covariance-fitting linear maps in RGB with a choice of decomposition:
  Cholesky, square-root, or the closed-form Monge-Kantorovitch optimal map
  (``pitie_linear_transfer``).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .imaging import ColorStats, clamp01, compute_stats, ensure_image, lab_to_rgb, rgb_to_lab

# Eigenvalues of the target covariance below this are treated as degenerate.
MIN_COV_EIGENVALUE = 1e-8

# Reinhard channels with std at or below this fall back to a pure mean shift.
MIN_CHANNEL_STD = 1e-6


class NearSingularCovariance(ValueError):
    """Target colors span (nearly) fewer than three dimensions."""


class ColorSpace(Enum):
    RGB = "rgb"
    LAB = "lab"


class Decomposition(Enum):
    """How the covariance-fitting transform is factorized."""

    CHOLESKY = "cholesky"
    SQRT = "sqrt"
    MONGE_KANTOROVITCH = "mk"


@dataclass(frozen=True)
class LinearColorMap:
    """An affine pixel map p -> matrix @ p + offset in the given space."""

    matrix: np.ndarray
    offset: np.ndarray
    space: ColorSpace

    def __post_init__(self):
        if not (np.all(np.isfinite(self.matrix)) and np.all(np.isfinite(self.offset))):
            raise ValueError("linear color map must have finite entries")

    def apply(self, img: np.ndarray) -> np.ndarray:
        pixels = ensure_image(img)
        return pixels @ self.matrix.T + self.offset


def _sqrtm_spd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    w = np.maximum(w, 0.0)
    return (v * np.sqrt(w)) @ v.T


def _eigendecompose(cov: np.ndarray):
    return np.linalg.eigh(0.5 * (cov + cov.T))


def _check_target_cov(cov: np.ndarray) -> np.ndarray:
    w, _ = _eigendecompose(cov)
    if w.min() < MIN_COV_EIGENVALUE:
        raise NearSingularCovariance(
            f"target covariance is near-singular (min eigenvalue {w.min():.3e}); "
            "the target image has (nearly) degenerate colors"
        )
    return cov


def _regularize_reference_cov(cov: np.ndarray) -> np.ndarray:
    # Near-constant references get a small isotropic floor instead of failing.
    w, _ = _eigendecompose(cov)
    if w.min() < MIN_COV_EIGENVALUE:
        return cov + MIN_COV_EIGENVALUE * np.eye(3)
    return cov


def fit_reinhard(target_stats: ColorStats, reference_stats: ColorStats) -> LinearColorMap:
    """Per-channel gain/shift matching means and stds (intended for Lab stats).

    Channels whose target std is degenerate get gain 1, i.e. a mean shift.
    """
    healthy = target_stats.std > MIN_CHANNEL_STD
    safe_std = np.where(healthy, target_stats.std, 1.0)
    gains = np.where(healthy, reference_stats.std / safe_std, 1.0)
    offset = reference_stats.mean - gains * target_stats.mean
    return LinearColorMap(matrix=np.diag(gains), offset=offset, space=ColorSpace.LAB)


def fit_xiao(target_stats: ColorStats, reference_stats: ColorStats) -> LinearColorMap:
    """Scale-rotation-shift map built from both covariance eigensystems."""
    cov_t = _check_target_cov(target_stats.cov)
    cov_r = _regularize_reference_cov(reference_stats.cov)
    w_t, rot_t = _eigendecompose(cov_t)
    w_r, rot_r = _eigendecompose(cov_r)
    matrix = (rot_r * np.sqrt(w_r)) @ (rot_t / np.sqrt(w_t)).T
    offset = reference_stats.mean - matrix @ target_stats.mean
    return LinearColorMap(matrix=matrix, offset=offset, space=ColorSpace.RGB)


def fit_pitie(
    target_stats: ColorStats,
    reference_stats: ColorStats,
    decomposition: Decomposition = Decomposition.MONGE_KANTOROVITCH,
) -> LinearColorMap:
    """Covariance-fitting map T with T @ cov_t @ T.T == cov_r.

    The Monge-Kantorovitch kind is the unique symmetric positive-definite
    solution; Cholesky and square-root are the other two classic
    factorizations of the same fitting identity.
    """
    cov_t = _check_target_cov(target_stats.cov)
    cov_r = _regularize_reference_cov(reference_stats.cov)
    if decomposition is Decomposition.CHOLESKY:
        l_t = np.linalg.cholesky(cov_t)
        l_r = np.linalg.cholesky(cov_r)
        matrix = l_r @ np.linalg.inv(l_t)
    elif decomposition is Decomposition.SQRT:
        matrix = _sqrtm_spd(cov_r) @ np.linalg.inv(_sqrtm_spd(cov_t))
    elif decomposition is Decomposition.MONGE_KANTOROVITCH:
        root_t = _sqrtm_spd(cov_t)
        inv_root_t = np.linalg.inv(root_t)
        matrix = inv_root_t @ _sqrtm_spd(root_t @ cov_r @ root_t) @ inv_root_t
        matrix = 0.5 * (matrix + matrix.T)
    else:
        raise ValueError(f"unknown decomposition: {decomposition!r}")
    offset = reference_stats.mean - matrix @ target_stats.mean
    return LinearColorMap(matrix=matrix, offset=offset, space=ColorSpace.RGB)


def reinhard_transfer(target: np.ndarray, reference: np.ndarray, clamp: bool = True) -> np.ndarray:
    """Match per-channel mean and std to the reference in CIELAB."""
    target_lab = rgb_to_lab(target)
    reference_lab = rgb_to_lab(reference)
    color_map = fit_reinhard(compute_stats(target_lab), compute_stats(reference_lab))
    return lab_to_rgb(color_map.apply(target_lab), clamp=clamp)


def xiao_transfer(target: np.ndarray, reference: np.ndarray, clamp: bool = True) -> np.ndarray:
    """Match mean and full covariance to the reference in RGB.

    Raises NearSingularCovariance for degenerate target colors; callers may
    fall back to reinhard_transfer.
    """
    color_map = fit_xiao(compute_stats(target), compute_stats(reference))
    out = color_map.apply(target)
    return clamp01(out) if clamp else out


def pitie_linear_transfer(
    target: np.ndarray,
    reference: np.ndarray,
    decomposition: Decomposition = Decomposition.MONGE_KANTOROVITCH,
    clamp: bool = True,
) -> np.ndarray:
    """Covariance-fitting transfer in RGB with the chosen decomposition."""
    color_map = fit_pitie(compute_stats(target), compute_stats(reference), decomposition)
    out = color_map.apply(target)
    return clamp01(out) if clamp else out
