"""Spectral laboratory for parabolic comparison principles and Galerkin Navier-Stokes."""

from .errors import (
    ConfigError,
    DegenerateInputError,
    DivergenceError,
    FeasibilityError,
    InputError,
    PclabError,
    PreconditionError,
)
from .evolution import SourceSpec, heat_evolve, heat_trajectory, parabolic_evolve
from .spectral import BoxDomain, NodalField, SpectralField, TimeGrid, basis_field, norm, project

__version__ = "0.1.0"
