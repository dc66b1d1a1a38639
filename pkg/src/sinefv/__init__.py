"""Sine-transform preconditioned Krylov solvers for the Crank-Nicolson
finite-volume discretization of conservative fractional diffusion."""

from .analysis import BoundReport, compute_bounds, dense_preconditioned_spectrum
from .coeffs import CoefficientTable, coefficient_table
from .config import ConfigError, ExperimentConfig
from .krylov import KrylovConfig, SolveStats, gmres_restarted, gmres_two_sided, pcg
from .operators import CnFvOperator, GridSpec, ToeplitzOperator
from .preconditioners import (
    CirculantPreconditioner,
    TauPreconditioner,
    assemble_circulant,
    assemble_tau,
)
from .problems import make_problem
from .scheme import ProblemSpec, SolveReport, observed_order, time_march

__all__ = [
    "BoundReport",
    "CirculantPreconditioner",
    "CnFvOperator",
    "CoefficientTable",
    "ConfigError",
    "ExperimentConfig",
    "GridSpec",
    "KrylovConfig",
    "ProblemSpec",
    "SolveReport",
    "SolveStats",
    "TauPreconditioner",
    "ToeplitzOperator",
    "assemble_circulant",
    "assemble_tau",
    "coefficient_table",
    "compute_bounds",
    "dense_preconditioned_spectrum",
    "gmres_restarted",
    "gmres_two_sided",
    "make_problem",
    "observed_order",
    "pcg",
    "time_march",
]

__version__ = "0.1.0"
