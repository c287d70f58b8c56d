"""
Synthetic classifiers for SmoothCert.
"""

from .synthetic_models import (
    GradientEstimate, HardmaxVarianceExample, ModelKind, SyntheticModel,
    eval_worst_case_hbar, exact_smoothed_threshold, hardmax_variance_example,
    numeric_smoothed_gradient_norm, spectral_norm,
)

__all__ = [
    'GradientEstimate', 'HardmaxVarianceExample', 'ModelKind', 'SyntheticModel',
    'eval_worst_case_hbar', 'exact_smoothed_threshold', 'hardmax_variance_example',
    'numeric_smoothed_gradient_norm', 'spectral_norm',
]
