"""Exact computation and verification toolkit for quasi-Banach function spaces of step functions."""

__version__ = "0.1.0"

from .measure import Box, DyadicComplex, DyadicCube, MeasureSpaceDescriptor, measure
from .quasinorm import QuasinormSpec, linf, lorentz, lp, parse_norm
from .rearrangement import (
    RadialProfile,
    RearrangementProfile,
    distribution_function,
    nonincreasing_rearrangement,
    radial_rearrangement,
)
from .stepfunction import StepFunction

__all__ = [
    "Box",
    "DyadicComplex",
    "DyadicCube",
    "MeasureSpaceDescriptor",
    "QuasinormSpec",
    "RadialProfile",
    "RearrangementProfile",
    "StepFunction",
    "distribution_function",
    "linf",
    "lorentz",
    "lp",
    "measure",
    "nonincreasing_rearrangement",
    "parse_norm",
    "radial_rearrangement",
]
