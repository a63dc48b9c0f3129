"""Color-mismatch correction for stereoscopic image pairs."""

from .distortion import (
    DistortionOp,
    DistortionSpec,
    apply_brightness_contrast,
    apply_gamma,
    apply_hsv_shift,
    sample_spec,
    synthesize,
)
from .global_transfer import (
    Decomposition,
    LinearColorMap,
    NearSingularCovariance,
    pitie_linear_transfer,
    reinhard_transfer,
    xiao_transfer,
)
from .harness import (
    DatasetManifest,
    EvaluationReport,
    Layout,
    Split,
    correct_single,
    load_dataset,
    run_benchmark,
    split_dataset,
)
from .idt import IdtConfig, idt_transfer, pdf_transfer_1d, random_rotation, regrain
from .imaging import ColorStats, Stereopair, compute_stats, lab_to_rgb, rgb_to_lab
from .io_png import load_image, save_image
from .metrics import MetricsReport, psnr, ssim, time_method

__version__ = "0.1.0"

__all__ = [
    "ColorStats",
    "DatasetManifest",
    "Decomposition",
    "DistortionOp",
    "DistortionSpec",
    "EvaluationReport",
    "IdtConfig",
    "Layout",
    "LinearColorMap",
    "MetricsReport",
    "NearSingularCovariance",
    "Split",
    "Stereopair",
    "apply_brightness_contrast",
    "apply_gamma",
    "apply_hsv_shift",
    "compute_stats",
    "correct_single",
    "idt_transfer",
    "lab_to_rgb",
    "load_dataset",
    "load_image",
    "pdf_transfer_1d",
    "pitie_linear_transfer",
    "psnr",
    "random_rotation",
    "regrain",
    "reinhard_transfer",
    "rgb_to_lab",
    "run_benchmark",
    "sample_spec",
    "save_image",
    "split_dataset",
    "ssim",
    "synthesize",
    "time_method",
    "xiao_transfer",
]
