"""
Projected L-BFGS
================

Bound-constrained limited-memory BFGS with Armijo backtracking along the
projection arc. A failed line search along the quasi-Newton direction is
retried once along steepest descent.
"""

import logging
from collections import deque
from typing import Optional

import numpy as np

from .base import DescentMethod, Objective
from .types import StepResult, TrialRejected


def projected_gradient(x: np.ndarray, gradient: np.ndarray, lower: float, upper: float) -> np.ndarray:
    """x − P(x − g); zero exactly at KKT points of the box problem."""
    return x - np.clip(x - gradient, lower, upper)


def free_variables(x: np.ndarray, gradient: np.ndarray, lower: float, upper: float) -> np.ndarray:
    """Mask of components not held at a bound by the gradient."""
    at_lower = (x <= lower) & (gradient > 0)
    at_upper = (x >= upper) & (gradient < 0)
    return ~(at_lower | at_upper)


class ProjectedLBFGS(DescentMethod):
    """
    Args:
        memory: number of stored (s, y) pairs
        c1: Armijo sufficient-decrease constant
        shrink: backtracking factor
        max_backtracks: backtracks per line search
        first_step: length of the first step of a fresh history
        logger: optional logger
    """

    def __init__(
        self,
        memory: int = 10,
        c1: float = 1e-4,
        shrink: float = 0.5,
        max_backtracks: int = 30,
        first_step: float = 0.1,
        logger: Optional[logging.Logger] = None,
    ):
        if memory < 1:
            raise ValueError("memory must be positive")
        if not 0 < shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        self.memory = memory
        self.c1 = c1
        self.shrink = shrink
        self.max_backtracks = max_backtracks
        self.first_step = first_step
        self.logger = logger or logging.getLogger(__name__)
        self._pairs: deque = deque(maxlen=memory)

    def reset(self) -> None:
        self._pairs.clear()

    @property
    def history_size(self) -> int:
        return len(self._pairs)

    def direction(self, gradient: np.ndarray) -> np.ndarray:
        """Two-loop recursion: −H·g."""
        q = gradient.copy()
        if not self._pairs:
            norm = np.linalg.norm(q)
            return -q * (self.first_step / norm) if norm > 0 else -q

        alphas = []
        for s, y, rho in reversed(self._pairs):
            a = rho * np.dot(s, q)
            q -= a * y
            alphas.append(a)
        s, y, _ = self._pairs[-1]
        q *= np.dot(s, y) / np.dot(y, y)
        for (s, y, rho), a in zip(self._pairs, reversed(alphas)):
            b = rho * np.dot(y, q)
            q += (a - b) * s
        return -q

    def _update(self, s: np.ndarray, y: np.ndarray) -> None:
        sy = float(np.dot(s, y))
        if sy <= 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
            self.logger.debug(f"Skipping curvature pair (s·y = {sy:.3e})")
            return
        self._pairs.append((s, y, 1.0 / sy))

    def _line_search(self, fun: Objective, x, value, gradient, d, lower, upper):
        """Armijo backtracking on P(x + t·d). Returns (trial, evaluations)."""
        evaluations = 0
        t = 1.0
        for _ in range(self.max_backtracks + 1):
            x_new = np.clip(x + t * d, lower, upper)
            s = x_new - x
            if not np.any(s):
                break
            evaluations += 1
            try:
                f_new, g_new, payload = fun(x_new)
            except TrialRejected as e:
                self.logger.info(f"Trial at t={t:.3e} rejected: {e}")
                t *= self.shrink
                continue
            if f_new <= value + self.c1 * np.dot(gradient, s):
                return (x_new, f_new, np.asarray(g_new, dtype=float), payload), evaluations
            t *= self.shrink
        return None, evaluations

    def step(self, fun: Objective, x, value, gradient, lower, upper) -> StepResult:
        x = np.asarray(x, dtype=float)
        gradient = np.asarray(gradient, dtype=float)
        if not np.any(projected_gradient(x, gradient, lower, upper)):
            return StepResult(x=x, value=value, gradient=gradient, step_norm=0.0, success=True, direction="none")

        free = free_variables(x, gradient, lower, upper)
        evaluations = 0
        for kind in ("lbfgs", "steepest"):
            if kind == "lbfgs":
                d = self.direction(gradient)
            else:
                self.reset()
                d = self.direction(gradient)
            d = np.where(free, d, 0.0)
            if np.dot(d, gradient) >= 0:
                self.logger.debug(f"{kind} direction is not a descent direction")
                continue
            accepted, count = self._line_search(fun, x, value, gradient, d, lower, upper)
            evaluations += count
            if accepted is not None:
                x_new, f_new, g_new, payload = accepted
                self._update(x_new - x, g_new - gradient)
                return StepResult(
                    x=x_new,
                    value=f_new,
                    gradient=g_new,
                    step_norm=float(np.linalg.norm(x_new - x)),
                    evaluations=evaluations,
                    success=True,
                    direction=kind,
                    payload=payload,
                )
            self.logger.warning(f"No Armijo decrease along the {kind} direction")

        return StepResult(
            x=x,
            value=value,
            gradient=gradient,
            step_norm=0.0,
            evaluations=evaluations,
            success=False,
            direction="none",
        )


def descent_step(
    fun: Objective,
    x: np.ndarray,
    value: float,
    gradient: np.ndarray,
    lower: float = -1e20,
    upper: float = 1e20,
    method: Optional[DescentMethod] = None,
) -> StepResult:
    """
    One projected descent step α → α' on [lower, upper].

    `method` carries the line-search state between calls; a fresh
    ProjectedLBFGS is used when omitted.
    """
    method = method or ProjectedLBFGS()
    return method.step(fun, x, value, gradient, lower, upper)
