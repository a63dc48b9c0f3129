"""Shared building blocks."""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn


class BadShape(ValueError):
    """Input tensor has an unsupported shape."""


class WeightedResidualBlock(nn.Module):
    """Two 3x3 convolutions plus a learnable-weighted skip connection.

    `batch_norm=False` drops normalization entirely (used by the transfer
    decoder, where normalization causes visible artifacts). Setting the skip
    weight to zero reduces the block to its convolutional path alone.
    """

    def __init__(self, in_channels, out_channels, stride=1, batch_norm=True):
        super().__init__()
        self.conv1 = nn.Conv2d(in_channels, out_channels, 3, stride, 1)
        self.conv2 = nn.Conv2d(out_channels, out_channels, 3, 1, 1)
        self.norm1 = nn.BatchNorm2d(out_channels) if batch_norm else nn.Identity()
        self.norm2 = nn.BatchNorm2d(out_channels) if batch_norm else nn.Identity()
        if stride != 1 or in_channels != out_channels:
            self.skip = nn.Conv2d(in_channels, out_channels, 1, stride)
        else:
            self.skip = nn.Identity()
        self.skip_weight = nn.Parameter(torch.ones(()))

    def conv_path(self, x):
        return self.norm2(self.conv2(F.relu(self.norm1(self.conv1(x)))))

    def forward(self, x):
        return self.conv_path(x) + self.skip_weight * self.skip(x)
