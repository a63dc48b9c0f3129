"""Full corrector: features -> cascaded parallax attention -> transfer."""

from __future__ import annotations

import torch
from torch import nn

from .attention import CascadedParallaxAttention
from .features import DEFAULT_CHANNELS, FeatureExtractor
from .transfer import TransferModule


class ColorCorrectionNet(nn.Module):
    """Transfers color from the right view onto the left view's structure."""

    def __init__(self, channels=DEFAULT_CHANNELS, valid_threshold=0.1):
        super().__init__()
        self.channels = tuple(channels)
        self.valid_threshold = valid_threshold
        self.features = FeatureExtractor(self.channels)
        self.caspam = CascadedParallaxAttention(
            {16: self.channels[4], 8: self.channels[3], 4: self.channels[2]},
            valid_threshold=valid_threshold,
        )
        self.transfer = TransferModule(self.channels)

    def forward(self, left, right):
        """left, right (B, 3, H, W) in [0, 1], H and W divisible by 32.

        Returns (corrected_left, AttentionMaps).
        """
        left_feats = self.features(left)
        right_feats = self.features(right)
        attention = self.caspam(left_feats, right_feats, left, right)
        corrected = self.transfer(left_feats, attention, left)
        return corrected, attention

    def hyperparameters(self):
        return {"channels": list(self.channels), "valid_threshold": self.valid_threshold}


class CheckpointMismatch(RuntimeError):
    """Checkpoint contents do not fit the requested model."""


def save_checkpoint(path, model: ColorCorrectionNet, extra=None):
    payload = {
        "state_dict": model.state_dict(),
        "hyperparameters": model.hyperparameters(),
        "extra": extra or {},
    }
    torch.save(payload, path)


def load_checkpoint(path) -> ColorCorrectionNet:
    try:
        payload = torch.load(path, map_location="cpu", weights_only=False)
        hyper = payload["hyperparameters"]
        model = ColorCorrectionNet(
            channels=hyper["channels"], valid_threshold=hyper["valid_threshold"]
        )
        model.load_state_dict(payload["state_dict"])
    except (KeyError, RuntimeError, TypeError) as exc:
        raise CheckpointMismatch(f"cannot load checkpoint {path}: {exc}") from exc
    model.eval()
    return model
