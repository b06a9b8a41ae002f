"""Two-level Borel-Laplace accelero-summation toolkit."""

__version__ = "0.1.0"

from ._kernels import USING_NUMBA
from .acceleration import AccelPlan, accelerate_formal, accelerate_numeric, kernel_G
from .asymptotics import flatness_fit, mittag_leffler
from .cauchy import ForcingSpec, ProblemSpec, SmallnessBudget, validate_constraints
from .coeffspace import CoeffGrid, WeightParams, emu_norm, inverse_fourier, star_product
from .series import TruncatedSeries, cauchy_product, expand_irregular, gevrey_fit
from .transforms import DirectionalFunction, analytic_borel, formal_borel, laplace_mk

__all__ = [
    "USING_NUMBA",
    "__version__",
    "AccelPlan",
    "CoeffGrid",
    "DirectionalFunction",
    "ForcingSpec",
    "ProblemSpec",
    "SmallnessBudget",
    "TruncatedSeries",
    "WeightParams",
    "accelerate_formal",
    "accelerate_numeric",
    "analytic_borel",
    "cauchy_product",
    "emu_norm",
    "expand_irregular",
    "flatness_fit",
    "formal_borel",
    "gevrey_fit",
    "inverse_fourier",
    "kernel_G",
    "laplace_mk",
    "mittag_leffler",
    "star_product",
    "validate_constraints",
]
