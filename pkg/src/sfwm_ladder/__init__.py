"""Biphoton generation by spontaneous four-wave mixing in a four-level ladder atom."""

__version__ = "0.1.0"

from .core import (AtomicSystem, Dipoles, FieldDrive, RelaxationRates, most_probable_speed,
                   rabi_frequency, relaxation_rates, validate_regime)
from .errors import (ConfigError, DegenerateDenominator, GridTooCoarse, InsufficientStatistics,
                     NumericalError, QuadratureNotConverged, SFWMError, SingularSystem,
                     ZeroNoiseFloor)
from .susceptibility import chi1_s2, chi3_s2, steady_state_solve, susceptibilities
from .biphoton import CorrelationTrace, DopplerQuadrature, g2_closed_form, g2_fourier
from .statistics import (DetectorModel, NoiseModel, cauchy_schwarz_R, noise_factor_B,
                         pair_production_rate, total_g2)

__all__ = [
    "AtomicSystem", "Dipoles", "FieldDrive", "RelaxationRates", "most_probable_speed",
    "rabi_frequency", "relaxation_rates", "validate_regime",
    "ConfigError", "DegenerateDenominator", "GridTooCoarse", "InsufficientStatistics",
    "NumericalError", "QuadratureNotConverged", "SFWMError", "SingularSystem", "ZeroNoiseFloor",
    "chi1_s2", "chi3_s2", "steady_state_solve", "susceptibilities",
    "CorrelationTrace", "DopplerQuadrature", "g2_closed_form", "g2_fourier",
    "DetectorModel", "NoiseModel", "cauchy_schwarz_R", "noise_factor_B",
    "pair_production_rate", "total_g2",
]
