"""
State module for the discrete pseudo-solid free boundary problem.

Unknowns are the potential u, the displacement v of the reference mesh and
the boundary multiplier p. The coupled residual, its exact Jacobian and the
design Jacobian are assembled from JAX element kernels; Newton's method
solves the system.
"""

from .types import (
    ElasticityParams,
    NewtonConvergenceError,
    NewtonIteration,
    NewtonResult,
    NewtonSettings,
    NewtonStepRejected,
    Residual,
    StateParams,
    StateSolveError,
    StateVector,
)
from .assembly import CandidateLists, StateAssembler, assemble_jacobian, assemble_residual
from .newton import newton_solve, write_newton_log

__all__ = [
    "ElasticityParams",
    "NewtonConvergenceError",
    "NewtonIteration",
    "NewtonResult",
    "NewtonSettings",
    "NewtonStepRejected",
    "Residual",
    "StateParams",
    "StateSolveError",
    "StateVector",
    "CandidateLists",
    "StateAssembler",
    "assemble_jacobian",
    "assemble_residual",
    "newton_solve",
    "write_newton_log",
]
