"""Cascaded parallax attention: epipolar soft matching between the views.

Attention is estimated at 1/16 resolution, then interpolated and refined at
1/8 and 1/4. Each stage runs four parallax-attention blocks that turn the
features into queries and keys and accumulate their products into a
matching map; a lower-triangular softmax (matches cannot lie beyond the
left position) turns the map into row-stochastic attention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
import torch.nn.functional as F
from torch import nn

ATTENTION_SCALES = (16, 8, 4)


def lower_triangular_softmax(logits):
    """Softmax over the last axis with strictly-above-diagonal entries removed.

    logits: (B, H, W, W) per-row matching scores; masked entries come out
    exactly zero.
    """
    width = logits.shape[-1]
    allowed = torch.tril(torch.ones(width, width, dtype=torch.bool, device=logits.device))
    return torch.softmax(logits.masked_fill(~allowed, float("-inf")), dim=-1)


def upper_triangular_softmax(logits):
    width = logits.shape[-1]
    allowed = torch.triu(torch.ones(width, width, dtype=torch.bool, device=logits.device))
    return torch.softmax(logits.masked_fill(~allowed, float("-inf")), dim=-1)


def warp_with_attention(attention, features):
    """attention (B, H, W, V) x features (B, C, H, V) -> (B, C, H, W)."""
    return torch.einsum("bhwv,bchv->bchw", attention, features)


def cycle_attention(a_r2l, a_l2r):
    """Left -> right -> left round trip, (B, H, W, W)."""
    return torch.einsum("bhwk,bhkv->bhwv", a_r2l, a_l2r)


def valid_mask_from_cycle(cycle, threshold=0.1, band=1):
    """Pixels whose round-trip mass stays within `band` of the diagonal."""
    width = cycle.shape[-1]
    idx = torch.arange(width, device=cycle.device)
    near = (idx[None, :] - idx[:, None]).abs() <= band
    mass = (cycle * near).sum(dim=-1)
    return (mass > threshold).to(cycle.dtype).unsqueeze(1)  # (B, 1, H, W)


class ParallaxAttentionBlock(nn.Module):
    def __init__(self, channels):
        super().__init__()
        self.update = nn.Sequential(
            nn.Conv2d(channels, channels, 3, 1, 1),
            nn.ReLU(inplace=True),
            nn.Conv2d(channels, channels, 3, 1, 1),
        )
        self.query = nn.Conv2d(channels, channels, 1)
        self.key = nn.Conv2d(channels, channels, 1)
        self.scale = channels**-0.5

    def forward(self, left, right, m_r2l, m_l2r):
        left = left + self.update(left)
        right = right + self.update(right)
        q_left, k_left = self.query(left), self.key(left)
        q_right, k_right = self.query(right), self.key(right)
        m_r2l = m_r2l + torch.einsum("bchw,bchv->bhwv", q_left, k_right) * self.scale
        m_l2r = m_l2r + torch.einsum("bchw,bchv->bhwv", q_right, k_left) * self.scale
        return left, right, m_r2l, m_l2r


class ParallaxAttentionModule(nn.Module):
    def __init__(self, channels, n_blocks=4):
        super().__init__()
        self.blocks = nn.ModuleList(ParallaxAttentionBlock(channels) for _ in range(n_blocks))

    def forward(self, left, right, m_r2l, m_l2r):
        for block in self.blocks:
            left, right, m_r2l, m_l2r = block(left, right, m_r2l, m_l2r)
        return m_r2l, m_l2r


def interpolate_matching_map(m):
    """Double a (B, H, W, W) matching map in all three spatial axes."""
    return F.interpolate(
        m.unsqueeze(1), scale_factor=2, mode="trilinear", align_corners=False
    ).squeeze(1)


@dataclass
class AttentionMaps:
    """Per-scale attention products consumed by the decoder and the losses."""

    r2l: dict = field(default_factory=dict)  # scale -> (B, H, W, W), rows sum to 1
    l2r: dict = field(default_factory=dict)
    valid: dict = field(default_factory=dict)  # scale -> (B, 1, H, W) in {0, 1}
    warped: dict = field(default_factory=dict)  # scale -> warped right features
    left_images: dict = field(default_factory=dict)  # scale -> downsampled left view
    right_images: dict = field(default_factory=dict)


class CascadedParallaxAttention(nn.Module):
    def __init__(self, channels_by_scale, valid_threshold=0.1):
        super().__init__()
        self.pams = nn.ModuleDict(
            {str(s): ParallaxAttentionModule(channels_by_scale[s]) for s in ATTENTION_SCALES}
        )
        self.valid_threshold = valid_threshold

    def forward(self, left_feats, right_feats, left_image=None, right_image=None):
        maps = AttentionMaps()
        m_r2l = m_l2r = None
        for scale in ATTENTION_SCALES:
            left = left_feats[scale]
            right = right_feats[scale]
            b, _, h, w = left.shape
            if m_r2l is None:
                m_r2l = left.new_zeros((b, h, w, w))
                m_l2r = left.new_zeros((b, h, w, w))
            else:
                m_r2l = interpolate_matching_map(m_r2l)
                m_l2r = interpolate_matching_map(m_l2r)
            m_r2l, m_l2r = self.pams[str(scale)](left, right, m_r2l, m_l2r)
            a_r2l = lower_triangular_softmax(m_r2l)
            a_l2r = upper_triangular_softmax(m_l2r)
            maps.r2l[scale] = a_r2l
            maps.l2r[scale] = a_l2r
            maps.valid[scale] = valid_mask_from_cycle(
                cycle_attention(a_r2l, a_l2r), self.valid_threshold
            )
            maps.warped[scale] = warp_with_attention(a_r2l, right)
            if left_image is not None:
                maps.left_images[scale] = F.avg_pool2d(left_image, scale)
                maps.right_images[scale] = F.avg_pool2d(right_image, scale)
        return maps
