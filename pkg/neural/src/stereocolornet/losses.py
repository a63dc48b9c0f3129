"""Training losses.

Supervised terms (L1, L2, SSIM) compare the corrected view against the
ground truth. The attention cascade trains without ground-truth attention
via photometric, smoothness, and cycle-consistency terms computed from the
attention maps themselves.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F

from .attention import ATTENTION_SCALES, cycle_attention, warp_with_attention

_LUMA = (0.299, 0.587, 0.114)

DEFAULT_WEIGHTS = (1.0, 1.0, 1.0, 0.1, 0.1, 0.1)


def _gaussian_kernel(size=11, sigma=1.5, dtype=torch.float32, device=None):
    offsets = torch.arange(size, dtype=dtype, device=device) - (size - 1) / 2.0
    kernel = torch.exp(-(offsets**2) / (2.0 * sigma**2))
    kernel = kernel / kernel.sum()
    return torch.outer(kernel, kernel).view(1, 1, size, size)


def _luma(img):
    weights = img.new_tensor(_LUMA).view(1, 3, 1, 1)
    return (img * weights).sum(dim=1, keepdim=True)


def ssim_index(a, b, window=11, sigma=1.5, k1=0.01, k2=0.03):
    """Differentiable mean SSIM over interior windows on luma, range 1.0."""
    x, y = _luma(a), _luma(b)
    kernel = _gaussian_kernel(window, sigma, dtype=x.dtype, device=x.device)
    mu_x = F.conv2d(x, kernel)
    mu_y = F.conv2d(y, kernel)
    var_x = F.conv2d(x * x, kernel) - mu_x**2
    var_y = F.conv2d(y * y, kernel) - mu_y**2
    cov = F.conv2d(x * y, kernel) - mu_x * mu_y
    c1, c2 = k1**2, k2**2
    ssim_map = ((2 * mu_x * mu_y + c1) * (2 * cov + c2)) / (
        (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
    )
    return ssim_map.mean()


def l1_loss(corrected, gt):
    return (corrected - gt).abs().mean()


def l2_loss(corrected, gt):
    return ((corrected - gt) ** 2).mean()


def ssim_loss(corrected, gt):
    return 1.0 - ssim_index(corrected, gt)


def photometric_loss(attention):
    """Warped right image should reproduce the left image where valid."""
    total = attention.r2l[ATTENTION_SCALES[0]].new_zeros(())
    for scale in ATTENTION_SCALES:
        left = attention.left_images[scale]
        right = attention.right_images[scale]
        warped = warp_with_attention(attention.r2l[scale], right)
        valid = attention.valid[scale]
        diff = (left - warped).abs() * valid
        total = total + diff.sum() / (valid.sum() * left.shape[1] + 1e-8)
    return total / len(ATTENTION_SCALES)


def _mean_abs(t):
    # coarse maps can make a difference slice empty (e.g. height 1)
    return t.abs().mean() if t.numel() else t.new_zeros(())


def smoothness_loss(attention):
    """Attention should vary slowly along rows and along the disparity
    diagonal."""
    total = attention.r2l[ATTENTION_SCALES[0]].new_zeros(())
    for scale in ATTENTION_SCALES:
        for a in (attention.r2l[scale], attention.l2r[scale]):
            vertical = _mean_abs(a[:, :-1] - a[:, 1:])
            diagonal = _mean_abs(a[:, :, :-1, :-1] - a[:, :, 1:, 1:])
            total = total + vertical + diagonal
    return total / (2 * len(ATTENTION_SCALES))


def cycle_loss(attention):
    """Round-trip attention should be the identity on valid pixels."""
    total = attention.r2l[ATTENTION_SCALES[0]].new_zeros(())
    for scale in ATTENTION_SCALES:
        cycle = cycle_attention(attention.r2l[scale], attention.l2r[scale])
        width = cycle.shape[-1]
        eye = torch.eye(width, dtype=cycle.dtype, device=cycle.device)
        valid = attention.valid[scale].squeeze(1).unsqueeze(-1)
        diff = (cycle - eye).abs() * valid
        total = total + diff.sum() / (valid.sum() * width + 1e-8)
    return total / len(ATTENTION_SCALES)


@dataclass
class LossBundle:
    l1: torch.Tensor
    l2: torch.Tensor
    ssim_loss: torch.Tensor
    photometric: torch.Tensor
    smoothness: torch.Tensor
    cycle: torch.Tensor
    weights: tuple = DEFAULT_WEIGHTS

    def terms(self):
        return (self.l1, self.l2, self.ssim_loss, self.photometric, self.smoothness, self.cycle)

    @property
    def total(self):
        return sum(w * term for w, term in zip(self.weights, self.terms()))


def compute_losses(corrected, gt_left, attention, weights=DEFAULT_WEIGHTS) -> LossBundle:
    return LossBundle(
        l1=l1_loss(corrected, gt_left),
        l2=l2_loss(corrected, gt_left),
        ssim_loss=ssim_loss(corrected, gt_left),
        photometric=photometric_loss(attention),
        smoothness=smoothness_loss(attention),
        cycle=cycle_loss(attention),
        weights=tuple(weights),
    )
