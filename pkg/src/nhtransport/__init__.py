"""Wave spreading and scattering on non-Hermitian zigzag lattices with synthetic flux."""

from .errors import ConfigurationError, NumericalError, ResourceError
from .model import (
    AuxiliaryParams,
    LatticeParams,
    SiteField,
    build_auxiliary,
    build_chain,
    build_effective,
    build_zigzag,
    effective_params,
    gauge_shift,
    tune_auxiliary_energy,
)
from .propagator import InitialCondition, Trajectory, evolve
from .spectrum import dispersion_chain, dispersion_zigzag, finite_spectrum, saddle_constants

__version__ = "0.1.0"

__all__ = [
    "AuxiliaryParams",
    "ConfigurationError",
    "InitialCondition",
    "LatticeParams",
    "NumericalError",
    "ResourceError",
    "SiteField",
    "Trajectory",
    "build_auxiliary",
    "build_chain",
    "build_effective",
    "build_zigzag",
    "dispersion_chain",
    "dispersion_zigzag",
    "effective_params",
    "evolve",
    "finite_spectrum",
    "gauge_shift",
    "saddle_constants",
    "tune_auxiliary_energy",
]
