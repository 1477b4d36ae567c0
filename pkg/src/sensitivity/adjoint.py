"""
Adjoint Sensitivities
=====================

One transposed sparse solve per design: (∂r/∂q)ᵀν = −∇_q𝒥, then
∇_α𝒥 = (∂r/∂α)ᵀν plus the explicit α-dependence of the gray penalty.
"""

import logging
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..levelset import DesignVector
from ..objective import DEFAULT_SAMPLES, TargetShape, tracking_cost_and_gradient
from ..state import StateAssembler
from .types import AdjointVector, DesignJacobian, SensitivityError

logger = logging.getLogger(__name__)

ADJOINT_TOLERANCE = 1e-10


def grad_q_objective(
    assembler: StateAssembler,
    q: np.ndarray,
    target: TargetShape,
    design: Optional[DesignVector] = None,
    eta: float = 0.0,
    samples: int = DEFAULT_SAMPLES,
    center: Sequence[float] = (0.0, 0.0),
) -> np.ndarray:
    """
    ∇_q(𝒥 + 𝒥_η) in the state layout.

    𝒥 only sees the deformed boundary nodes, so it contributes to the
    q_v entries of boundary nodes; 𝒥_η contributes to q_u and q_v.
    """
    q = np.asarray(q, dtype=float)
    n = assembler.n
    boundary = assembler.mesh.boundary
    points = assembler.mesh.nodes[boundary] + q[n : 3 * n].reshape(n, 2)[boundary]
    _, grad_points = tracking_cost_and_gradient(points, target, samples, center)

    grad = np.zeros(assembler.size)
    idx = n + 2 * boundary[:, None] + np.arange(2)
    grad[idx.ravel()] = grad_points.ravel()
    if eta != 0.0:
        if design is None:
            raise SensitivityError("gray penalty gradient needs the design")
        _, grad_q, _ = assembler.gray_penalty(q, design, eta, gradients=True)
        grad += grad_q
    return grad


def solve_adjoint(jacobian: sp.spmatrix, rhs: np.ndarray, lu=None) -> AdjointVector:
    """
    Solve (∂r/∂q)ᵀν = rhs (rhs = −∇_q𝒥).

    Args:
        jacobian: ∂r/∂q at the converged state
        rhs: right-hand side
        lu: optional SuperLU factorization of `jacobian` to reuse

    Raises:
        SensitivityError: singular factorization or a non-finite solution.
    """
    rhs = np.asarray(rhs, dtype=float)
    if not np.any(rhs):
        return AdjointVector(nu=np.zeros_like(rhs), relative_residual=0.0)
    try:
        if lu is None:
            lu = splu(sp.csc_matrix(jacobian))
        nu = lu.solve(rhs, trans="T")
    except RuntimeError as e:
        raise SensitivityError(f"adjoint factorization failed: {e}")
    if not np.all(np.isfinite(nu)):
        raise SensitivityError("adjoint solution is not finite")

    transposed = sp.csr_matrix(jacobian).T
    scale = np.linalg.norm(rhs)
    defect = rhs - transposed @ nu
    relative = float(np.linalg.norm(defect) / scale)
    if relative > ADJOINT_TOLERANCE:
        nu = nu + lu.solve(defect, trans="T")
        relative = float(np.linalg.norm(rhs - transposed @ nu) / scale)
        if relative > ADJOINT_TOLERANCE:
            logger.warning(f"Adjoint relative residual {relative:.3e} after refinement")
    return AdjointVector(nu=nu, relative_residual=relative)


def design_jacobian(assembler: StateAssembler, q: np.ndarray, design: DesignVector) -> DesignJacobian:
    return DesignJacobian(matrix=assembler.design_jacobian(q, design))


def design_gradient(
    assembler: StateAssembler,
    q: np.ndarray,
    adjoint: AdjointVector,
    design: DesignVector,
    eta: float = 0.0,
) -> np.ndarray:
    """(∂r/∂α)ᵀν + ∂𝒥_η/∂α, flat over the N² knots."""
    gradient = design_jacobian(assembler, q, design).transpose_product(adjoint.nu)
    if eta != 0.0:
        _, _, grad_alpha = assembler.gray_penalty(q, design, eta, gradients=True)
        gradient = gradient + grad_alpha
    return gradient
