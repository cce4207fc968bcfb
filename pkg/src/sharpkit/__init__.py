"""Sharpness of quantum measurements: POVMs, fuzzifying operations and their monotones."""

from .config import DEFAULT, Tolerances
from .linalg import SolverFailure
from .povm import Povm, classify, validate

__all__ = ["DEFAULT", "Povm", "SolverFailure", "Tolerances", "classify", "validate"]
__version__ = "0.1.0"
