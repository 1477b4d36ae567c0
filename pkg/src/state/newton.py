"""
Newton Solver
=============

Full Newton iteration on r(q) = 0 with step halving. Each iteration
factorizes the unsymmetric sparse Jacobian with SuperLU.
"""

import csv
import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from scipy.sparse.linalg import splu

from ..levelset import DesignVector
from ..mesh import InvertedElementError
from .assembly import StateAssembler
from .types import (
    NewtonConvergenceError,
    NewtonIteration,
    NewtonResult,
    NewtonStepRejected,
    StateSolveError,
    StateVector,
)

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 25
DEFAULT_MAX_HALVINGS = 8

NEWTON_LOG_HEADER = ["iter", "r1", "r2", "r3", "halvings"]


def newton_solve(
    assembler: StateAssembler,
    initial: StateVector,
    design: DesignVector,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    max_halvings: int = DEFAULT_MAX_HALVINGS,
    logger: Optional[logging.Logger] = None,
) -> NewtonResult:
    """
    Solve r(q) = 0 starting from `initial`.

    A step is halved (up to `max_halvings` times) while the trial state
    inverts a triangle or does not decrease ‖r‖₂. If the last halving still
    gives no decrease the step is rejected, unless that trial already meets
    the tolerance. Convergence is ‖r‖_∞ ≤ tol, checked before the first step.

    Raises:
        NewtonConvergenceError: `max_iter` steps without convergence.
        NewtonStepRejected: no decrease along the Newton direction.
        InvertedElementError: the initial state or every halved trial
            inverts a triangle.
        StateSolveError: singular Jacobian.
    """
    log = logger or logging.getLogger(__name__)
    if assembler.is_degenerate(design):
        log.warning("DEGENERATE design: psi == 0, H_beta = 1/2 everywhere")

    q = initial.stack()
    if not np.all(np.isfinite(q)):
        raise StateSolveError("initial state is not finite")
    residual, jacobian = assembler.evaluate(q, design)
    history: List[NewtonIteration] = [NewtonIteration(iteration=0, r1=residual.norms[0], r2=residual.norms[1], r3=residual.norms[2])]
    log.info(f"Newton 0: |r|_inf={residual.max_norm:.3e}")

    iteration = 0
    while residual.max_norm > tol:
        if iteration >= max_iter:
            raise NewtonConvergenceError(residual.max_norm, iteration, history)
        iteration += 1

        try:
            step = splu(jacobian.tocsc()).solve(-residual.stack())
        except RuntimeError as e:
            raise StateSolveError(f"singular Jacobian at iteration {iteration}: {e}", residual.max_norm)
        if not np.all(np.isfinite(step)):
            raise StateSolveError(f"non-finite Newton step at iteration {iteration}", residual.max_norm)

        current = residual.l2_norm
        scale, halvings = 1.0, 0
        accepted = None
        last_error: Optional[InvertedElementError] = None
        while True:
            trial = q + scale * step
            try:
                trial_residual, trial_jacobian = assembler.evaluate(trial, design)
                valid = np.isfinite(trial_residual.l2_norm)
            except InvertedElementError as e:
                last_error, valid = e, False
            if valid:
                accepted = (trial, trial_residual, trial_jacobian)
                if trial_residual.l2_norm < current:
                    break
            if halvings == max_halvings:
                break
            scale *= 0.5
            halvings += 1

        if accepted is None:
            raise last_error or StateSolveError("no valid Newton trial", residual.max_norm)
        if not accepted[1].l2_norm < current and accepted[1].max_norm > tol:
            log.warning(f"Newton {iteration}: no decrease after {halvings} halvings, step rejected")
            raise NewtonStepRejected(residual.max_norm, iteration, halvings, history)
        q, residual, jacobian = accepted
        history.append(
            NewtonIteration(
                iteration=iteration,
                r1=residual.norms[0],
                r2=residual.norms[1],
                r3=residual.norms[2],
                halvings=halvings,
            )
        )
        log.info(f"Newton {iteration}: |r|_inf={residual.max_norm:.3e} halvings={halvings}")

    state = StateVector.from_stacked(q, assembler.n, assembler.n_e)
    return NewtonResult(state=state, iterations=iteration, history=history, residual=residual, jacobian=jacobian)


def write_newton_log(path: Union[str, Path], history: List[NewtonIteration]) -> Path:
    """CSV with columns iter, r1, r2, r3, halvings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(NEWTON_LOG_HEADER)
        for row in history:
            writer.writerow([row.iteration, repr(row.r1), repr(row.r2), repr(row.r3), row.halvings])
    return path
