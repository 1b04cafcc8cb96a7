"""Traveling waves of the logistic Keller-Segel model.

Closed-form minimum speeds, shooting for heteroclinic orbits, grid
certificates for trap regions, and a method-of-lines simulator.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND  # noqa: E402
from .model import AffineChi, ConstantChi, ModelParams, TabulatedChi, validate_params  # noqa: E402
from .spectra import min_wave_speed, origin_spectrum  # noqa: E402
from .heteroclinic import ShootConfig, extract_profile, find_min_speed_empirical, shoot  # noqa: E402

__all__ = [
    "BACKEND", "AffineChi", "ConstantChi", "ModelParams", "TabulatedChi", "validate_params",
    "min_wave_speed", "origin_spectrum", "ShootConfig", "extract_profile",
    "find_min_speed_empirical", "shoot", "__version__",
]
