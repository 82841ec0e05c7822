"""Super-resolution from box-filtered measurements at several pixel scales."""

from .signals import (BoxKernel, ConvMode, GridSignal, IntegralImage, MeasurementSet, Normalization,
                      ShapeError, add_noise, aggregate_scale, apply_T, apply_T_adjoint, box_convolve,
                      dense_operator, integral_image, interlace_measure)
from .spectral import (NonInvertibleError, SpectralProfile, condition_number, predicted_mse,
                       stacked_profile)
from .reconstruction import Method, PadPolicy, ReconstructionConfig, ReconstructionResult, reconstruct

__version__ = "0.1.0"

__all__ = [
    "BoxKernel", "ConvMode", "GridSignal", "IntegralImage", "MeasurementSet", "Method",
    "NonInvertibleError", "Normalization", "PadPolicy", "ReconstructionConfig", "ReconstructionResult",
    "ShapeError", "SpectralProfile", "add_noise", "aggregate_scale", "apply_T", "apply_T_adjoint",
    "box_convolve", "condition_number", "dense_operator", "integral_image", "interlace_measure",
    "predicted_mse", "reconstruct", "stacked_profile",
]
