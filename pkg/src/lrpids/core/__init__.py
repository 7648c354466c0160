"""
lrpids Core Module.

- Connection kernels, weight laws and model parameters
- Experiment configuration schemas
- Runtime settings from LRPIDS_* environment variables
- Error classification and handling
"""

from .errors import (
    ClassifiedError,
    ConfigError,
    ErrorType,
    LrpIdsError,
    NumericalError,
    classify_error,
    format_error_for_display,
)
from .kernels import (
    ConstantLaw,
    ExponentialCoupling,
    GaussianLaw,
    GeometricKernel,
    JBetaKernel,
    ModelParams,
    NearestNeighborKernel,
    PolynomialKernel,
    PowerCoupling,
    RademacherLaw,
    UniformLaw,
    ZeroKernel,
    kernel_l1,
    kernel_tail,
    kernel_value,
    moment_budget,
    truncation_radius,
)
from .schemas import ExperimentConfig, OutputSection, RunSection, load_config
from .settings import RuntimeSettings, get_settings, load_settings_from_env, set_settings

__all__ = [
    "ClassifiedError",
    "ConfigError",
    "ErrorType",
    "LrpIdsError",
    "NumericalError",
    "classify_error",
    "format_error_for_display",
    "ConstantLaw",
    "ExponentialCoupling",
    "GaussianLaw",
    "GeometricKernel",
    "JBetaKernel",
    "ModelParams",
    "NearestNeighborKernel",
    "PolynomialKernel",
    "PowerCoupling",
    "RademacherLaw",
    "UniformLaw",
    "ZeroKernel",
    "kernel_l1",
    "kernel_tail",
    "kernel_value",
    "moment_budget",
    "truncation_radius",
    "ExperimentConfig",
    "OutputSection",
    "RunSection",
    "load_config",
    "RuntimeSettings",
    "get_settings",
    "load_settings_from_env",
    "set_settings",
]
