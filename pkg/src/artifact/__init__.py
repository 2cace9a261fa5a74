"""Numerical laboratory for Matsumoto zeta-functions and discrete universality over zeta zeros."""

from .config import CODE_VERSION as __version__
from .errors import NumericAccuracyError, ValidationError
from .matsumoto import BUILTIN_NAMES, MatsumotoSpec, analytic_eval, builtin_spec, dirichlet_coeffs, generic_copy
from .zeros import ZeroTable, compute_zeros, load_zeros, store_zeros

__all__ = [
    "BUILTIN_NAMES",
    "MatsumotoSpec",
    "NumericAccuracyError",
    "ValidationError",
    "ZeroTable",
    "__version__",
    "analytic_eval",
    "builtin_spec",
    "compute_zeros",
    "dirichlet_coeffs",
    "generic_copy",
    "load_zeros",
    "store_zeros",
]
