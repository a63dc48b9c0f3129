"""Multiscale transfer decoder: fuses left features, warped right features,
and the valid mask from 1/32 up to full resolution.

No batch normalization anywhere in this module (it produces visible
artifacts in the output); upsampling between scales is a strided transposed
convolution. The full-resolution block emits the corrected left view.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from .blocks import WeightedResidualBlock
from .features import DEFAULT_CHANNELS

DECODE_ORDER = (32, 16, 8, 4, 2, 1)


class TransferModule(nn.Module):
    def __init__(self, channels=DEFAULT_CHANNELS):
        super().__init__()
        c = {1: channels[0], 2: channels[1], 4: channels[2], 8: channels[3],
             16: channels[4], 32: channels[5]}
        # channel count of the warped-right evidence available at each scale
        # (attention lives at 1/16, 1/8, 1/4; other scales are resampled)
        warped_c = {32: c[16], 16: c[16], 8: c[8], 4: c[4], 2: c[4], 1: c[4]}
        self.fuse = nn.ModuleDict()
        self.up = nn.ModuleDict()
        self.blocks = nn.ModuleDict()
        previous = None
        for scale in DECODE_ORDER:
            in_ch = 1 + c[scale] + warped_c[scale] + (3 if scale == 1 else 0)
            self.fuse[str(scale)] = nn.Conv2d(in_ch, c[scale], 1)
            if previous is not None:
                self.up[str(scale)] = nn.ConvTranspose2d(c[previous], c[scale], 4, 2, 1)
            out_ch = 3 if scale == 1 else c[scale]
            self.blocks[str(scale)] = WeightedResidualBlock(
                c[scale], out_ch, stride=1, batch_norm=False
            )
            previous = scale
        self._init_identity_output()

    def _init_identity_output(self):
        # Start the full-resolution block at the identity correction: its
        # skip reads the left view back out of the fused features and the
        # residual branch starts at zero, so training learns only the delta.
        with torch.no_grad():
            fuse = self.fuse["1"]
            offset = fuse.weight.shape[1] - 3  # left image is concatenated last
            fuse.weight[:3].zero_()
            fuse.bias[:3].zero_()
            for i in range(3):
                fuse.weight[i, offset + i, 0, 0] = 1.0
            up = self.up["1"]
            up.weight.zero_()
            up.bias.zero_()
            block = self.blocks["1"]
            block.skip.weight.zero_()
            block.skip.bias.zero_()
            for i in range(3):
                block.skip.weight[i, i, 0, 0] = 1.0
            block.conv2.weight.zero_()
            block.conv2.bias.zero_()

    @staticmethod
    def _spread_attention_products(attention, left_image):
        """Resample warped features and valid masks to every decode scale."""
        warped = dict(attention.warped)
        valid = dict(attention.valid)
        warped[32] = F.avg_pool2d(warped[16], 2)
        valid[32] = F.interpolate(valid[16], scale_factor=0.5, mode="nearest")
        warped[2] = F.interpolate(warped[4], scale_factor=2, mode="bilinear", align_corners=False)
        valid[2] = F.interpolate(valid[4], scale_factor=2, mode="nearest")
        warped[1] = F.interpolate(warped[4], scale_factor=4, mode="bilinear", align_corners=False)
        valid[1] = F.interpolate(valid[4], scale_factor=4, mode="nearest")
        return warped, valid

    def forward(self, left_feats, attention, left_image):
        warped, valid = self._spread_attention_products(attention, left_image)
        previous = None
        for scale in DECODE_ORDER:
            parts = [valid[scale], left_feats[scale], warped[scale]]
            if scale == 1:
                parts.append(left_image)
            x = self.fuse[str(scale)](torch.cat(parts, dim=1))
            if previous is not None:
                x = x + self.up[str(scale)](previous)
            previous = self.blocks[str(scale)](x)
        return previous  # (B, 3, H, W) corrected left view
