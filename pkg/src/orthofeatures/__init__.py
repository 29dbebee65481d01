"""Orthogonal random features for Gaussian kernel approximation."""

from .errors import (ConfigurationError, DimensionError, InputError, NumericalError,
                     OrthoFeaturesError, ParseError)
from .feature_maps import FeatureMap, Kind, TransformSpec, build, features, materialize, project
from .kernel_eval import (approx_kernel, exact_kernel, mse_estimate, select_sigma,
                          sorf_bias_bound, var_ratio_closed, var_rff_closed)
from .transforms import (apply_hd_chain, fwht, sample_chi_diagonal, sample_haar_orthogonal,
                         sample_sign_diagonal)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "DimensionError", "InputError", "NumericalError",
    "OrthoFeaturesError", "ParseError",
    "FeatureMap", "Kind", "TransformSpec", "build", "features", "materialize", "project",
    "approx_kernel", "exact_kernel", "mse_estimate", "select_sigma", "sorf_bias_bound",
    "var_ratio_closed", "var_rff_closed",
    "apply_hd_chain", "fwht", "sample_chi_diagonal", "sample_haar_orthogonal",
    "sample_sign_diagonal",
]
