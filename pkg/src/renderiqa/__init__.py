"""Quality metrics for comparing paired renders of the same scene.

Full-reference: :func:`mse`, :func:`psnr`, :func:`ssim`.  No-reference:
NIQE with a pristine model trained by :func:`train_model`.
"""
from .image import as_gray, downsample2x, gaussian_kernel, convolve_same, load_image, save_image, to_grayscale
from .metrics import Flag, SsimParams, SsimResult, mse, psnr, ssim
from .niqe import NiqeModel, NiqeParams, extract_features, load_model, mscn, niqe_score, save_model, train_model
from .nss import fit_aggd, fit_ggd
from .distort import DistortionSpec, apply
from .detections import confidence_delta_table, load_detections

__version__ = "0.1.0"

__all__ = [
    "as_gray", "downsample2x", "gaussian_kernel", "convolve_same", "load_image", "save_image", "to_grayscale",
    "Flag", "SsimParams", "SsimResult", "mse", "psnr", "ssim",
    "NiqeModel", "NiqeParams", "extract_features", "load_model", "mscn", "niqe_score", "save_model", "train_model",
    "fit_aggd", "fit_ggd", "DistortionSpec", "apply", "confidence_delta_table", "load_detections",
]
