"""Learned color-mismatch correction for stereo pairs."""

from .attention import AttentionMaps, CascadedParallaxAttention, lower_triangular_softmax
from .blocks import BadShape, WeightedResidualBlock
from .data import DatasetError, TripletPatchDataset, load_image, save_image
from .features import FeatureExtractor
from .infer import correct_pair, infer_files
from .losses import LossBundle, compute_losses, ssim_index
from .model import CheckpointMismatch, ColorCorrectionNet, load_checkpoint, save_checkpoint
from .train import TrainConfig, TrainResult, train
from .transfer import TransferModule

__version__ = "0.1.0"

__all__ = [
    "AttentionMaps",
    "BadShape",
    "CascadedParallaxAttention",
    "CheckpointMismatch",
    "ColorCorrectionNet",
    "DatasetError",
    "FeatureExtractor",
    "LossBundle",
    "TrainConfig",
    "TrainResult",
    "TransferModule",
    "TripletPatchDataset",
    "WeightedResidualBlock",
    "compute_losses",
    "correct_pair",
    "infer_files",
    "load_checkpoint",
    "load_image",
    "lower_triangular_softmax",
    "save_checkpoint",
    "save_image",
    "ssim_index",
    "train",
]
