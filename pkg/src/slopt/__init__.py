"""Spectral optimisation of 1-D Schroedinger potentials under L^p constraints."""

from .errors import (ConvergenceError, InadmissibleSolutionError, InvalidInputError,
                     SloptError)
from .function_space import PiecewisePotential, RadonMeasure, SampledFunction, UnitGrid
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "ConvergenceError", "InadmissibleSolutionError", "InvalidInputError",
           "PiecewisePotential", "RadonMeasure", "SampledFunction", "SloptError", "UnitGrid"]
