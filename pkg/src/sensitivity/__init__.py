"""
Sensitivity module: adjoint design gradients.

The gradient of the shape functional with respect to the RBF coefficients
costs one transposed solve with the converged Newton Jacobian, independent
of the number of design variables.
"""

from .types import (
    AdjointVector,
    DesignJacobian,
    Evaluation,
    GradientCheckReport,
    GradientCheckRow,
    SensitivityError,
)
from .adjoint import design_gradient, design_jacobian, grad_q_objective, solve_adjoint
from .problem import ShapeProblem
from .gradcheck import finite_difference_check, relative_error, select_components

__all__ = [
    "AdjointVector",
    "DesignJacobian",
    "Evaluation",
    "GradientCheckReport",
    "GradientCheckRow",
    "SensitivityError",
    "design_gradient",
    "design_jacobian",
    "grad_q_objective",
    "solve_adjoint",
    "ShapeProblem",
    "finite_difference_check",
    "relative_error",
    "select_components",
]
