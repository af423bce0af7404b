"""SSIM and Laplacian-pyramid SSIM (LaSSIM) with a validity-assessment harness."""

from .metrics import DEFAULT_LEVEL, SsimParams, lassim, lassim_profile, max_level, ssim
from .pyramid import PyramidParams, build_pyramid, reconstruct

__all__ = [
    "DEFAULT_LEVEL",
    "PyramidParams",
    "SsimParams",
    "build_pyramid",
    "lassim",
    "lassim_profile",
    "max_level",
    "reconstruct",
    "ssim",
]
