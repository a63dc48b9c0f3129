"""Multiscale feature extraction shared by both views.

Six encoder blocks take the image from full resolution down to 1/32; three
decoder blocks refine the 1/16, 1/8, and 1/4 levels that feed the attention
cascade. Downsampling uses strided convolutions, upsampling strided
transposed convolutions, and the channel count is fixed per scale.
"""

from __future__ import annotations

from torch import nn

from .blocks import BadShape, WeightedResidualBlock

DEFAULT_CHANNELS = (16, 32, 48, 64, 80, 96)  # scales 1, 1/2, 1/4, 1/8, 1/16, 1/32
SCALES = (1, 2, 4, 8, 16, 32)


class FeatureExtractor(nn.Module):
    def __init__(self, channels=DEFAULT_CHANNELS):
        super().__init__()
        c = tuple(channels)
        if len(c) != 6:
            raise ValueError("need one channel count per scale (6 scales)")
        self.channels = c
        self.encoders = nn.ModuleList(
            [
                WeightedResidualBlock(3, c[0], stride=1),
                WeightedResidualBlock(c[0], c[1], stride=2),
                WeightedResidualBlock(c[1], c[2], stride=2),
                WeightedResidualBlock(c[2], c[3], stride=2),
                WeightedResidualBlock(c[3], c[4], stride=2),
                WeightedResidualBlock(c[4], c[5], stride=2),
            ]
        )
        self.up16 = nn.ConvTranspose2d(c[5], c[4], 4, 2, 1)
        self.dec16 = WeightedResidualBlock(c[4], c[4])
        self.up8 = nn.ConvTranspose2d(c[4], c[3], 4, 2, 1)
        self.dec8 = WeightedResidualBlock(c[3], c[3])
        self.up4 = nn.ConvTranspose2d(c[3], c[2], 4, 2, 1)
        self.dec4 = WeightedResidualBlock(c[2], c[2])

    def forward(self, image):
        """image (B, 3, H, W) with H, W divisible by 32 -> {scale: features}."""
        if image.dim() != 4 or image.shape[1] != 3:
            raise BadShape(f"expected (B, 3, H, W), got {tuple(image.shape)}")
        if image.shape[2] % 32 or image.shape[3] % 32:
            raise BadShape(f"spatial dims must be divisible by 32, got {tuple(image.shape[2:])}")
        skips = []
        x = image
        for encoder in self.encoders:
            x = encoder(x)
            skips.append(x)
        e1, e2, e4, e8, e16, e32 = skips
        f16 = self.dec16(self.up16(e32) + e16)
        f8 = self.dec8(self.up8(f16) + e8)
        f4 = self.dec4(self.up4(f8) + e4)
        return {1: e1, 2: e2, 4: f4, 8: f8, 16: f16, 32: e32}
