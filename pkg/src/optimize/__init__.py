"""
Optimize Module

Projected L-BFGS on the RBF coefficients and the staged re-initialization
loop around it.
"""

from .algorithm import (
    AlgorithmResult,
    BestDesign,
    ShapeOptimizer,
    build_grid,
    initial_design,
    initial_domain,
    run_algorithm1,
    schedule_from_config,
)
from .base import DescentMethod, Objective
from .lbfgs import ProjectedLBFGS, descent_step, free_variables, projected_gradient
from .types import (
    OptimizationError,
    OptimizationTrace,
    Schedule,
    StageSummary,
    StepResult,
    TraceRecord,
    TrialRejected,
)

__all__ = [
    "AlgorithmResult",
    "BestDesign",
    "ShapeOptimizer",
    "build_grid",
    "initial_design",
    "initial_domain",
    "run_algorithm1",
    "schedule_from_config",
    "DescentMethod",
    "Objective",
    "ProjectedLBFGS",
    "descent_step",
    "free_variables",
    "projected_gradient",
    "OptimizationError",
    "OptimizationTrace",
    "Schedule",
    "StageSummary",
    "StepResult",
    "TraceRecord",
    "TrialRejected",
]
