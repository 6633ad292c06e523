"""Finite-volume simulation and diagnostics for the forager-exploiter
chemotaxis system with zero-flux boundaries."""

from .grid import Grid
from .kernels import BACKEND
from .model import ModelParams, NutrientSource, State

__all__ = ["BACKEND", "Grid", "ModelParams", "NutrientSource", "State"]
__version__ = "0.1.0"
