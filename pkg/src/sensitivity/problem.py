"""
Shape Problem
=============

Binds a state assembler to a target and evaluates 𝒥 + 𝒥_η with its adjoint
gradient at a design. One evaluation is one Newton solve.
"""

import logging
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.linalg import splu

from ..levelset import DesignVector
from ..objective import DEFAULT_SAMPLES, TargetShape, boundary_radius, gray_penalty, sample_count, tracking_cost
from ..state import NewtonResult, NewtonSettings, StateAssembler, StateVector, newton_solve
from .adjoint import design_gradient, grad_q_objective, solve_adjoint
from .types import Evaluation, SensitivityError


class ShapeProblem:
    """
    Objective and gradient evaluator on one reference mesh.

    Args:
        assembler: state assembler for the current reference mesh
        target: target free boundary
        eta: gray-region penalty weight (0 disables)
        newton: Newton controls
        samples: number of polar sample angles M (raised to 4 per boundary
            node of the mesh)
        center: center of the polar radius function
        logger: optional logger
    """

    def __init__(
        self,
        assembler: StateAssembler,
        target: TargetShape,
        eta: float = 0.0,
        newton: Optional[NewtonSettings] = None,
        samples: int = DEFAULT_SAMPLES,
        center: Sequence[float] = (0.0, 0.0),
        logger: Optional[logging.Logger] = None,
    ):
        self.assembler = assembler
        self.target = target
        self.eta = eta
        self.newton = newton or NewtonSettings()
        self.samples = sample_count(samples, assembler.n_e)
        self.center = tuple(center)
        self.logger = logger or logging.getLogger(__name__)

    def solve_state(self, design: DesignVector, initial: StateVector, tol: Optional[float] = None) -> NewtonResult:
        return newton_solve(
            self.assembler,
            initial,
            design,
            tol=self.newton.tol if tol is None else tol,
            max_iter=self.newton.max_iter,
            max_halvings=self.newton.max_halvings,
            logger=self.logger,
        )

    def objective_parts(self, q: np.ndarray, design: DesignVector):
        """(𝒥, 𝒥_η) at a converged state."""
        deformed = self.assembler.deformed_mesh(q)
        tracking = tracking_cost(boundary_radius(deformed, self.samples, self.center), self.target)
        return tracking, gray_penalty(self.assembler, q, design, self.eta)

    def evaluate(
        self,
        design: DesignVector,
        initial: StateVector,
        gradient: bool = True,
        tol: Optional[float] = None,
    ) -> Evaluation:
        """
        Solve the state, evaluate the objective and (optionally) its gradient.

        Raises:
            StateSolveError / InvertedElementError: the state solve failed.
            NonStarLikeError: the free boundary is not star-like.
            SensitivityError: the adjoint solve failed.
        """
        result = self.solve_state(design, initial, tol)
        q = result.state.stack()
        tracking, gray = self.objective_parts(q, design)
        if not gradient:
            return Evaluation(tracking=tracking, gray=gray, newton=result)

        rhs = -grad_q_objective(self.assembler, q, self.target, design, self.eta, self.samples, self.center)
        try:
            lu = splu(result.jacobian.tocsc())
        except RuntimeError as e:
            raise SensitivityError(f"Jacobian at the converged state is singular: {e}")
        adjoint = solve_adjoint(result.jacobian, rhs, lu=lu)
        grad = design_gradient(self.assembler, q, adjoint, design, self.eta)
        return Evaluation(
            tracking=tracking,
            gray=gray,
            gradient=grad,
            newton=result,
            adjoint_residual=adjoint.relative_residual,
        )
