"""Charge-conserving Poisson-Boltzmann solvers, zero-eps limits and boundary-layer diagnostics."""
from .ions import BoundaryData, IonSystem
from .grid import Field, Grid, make_graded, make_uniform
from .solver import SolveReport, SolverConfig, solve

__all__ = ["BoundaryData", "IonSystem", "Field", "Grid", "make_graded", "make_uniform",
           "SolveReport", "SolverConfig", "solve"]
__version__ = "0.1.0"
