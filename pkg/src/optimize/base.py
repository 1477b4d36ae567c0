"""
Base class for bound-constrained descent methods.
"""

from abc import ABC, abstractmethod
from typing import Any, Callable, Tuple

import numpy as np

from .types import StepResult

# fun(x) -> (value, gradient, payload); raises TrialRejected for an infeasible trial
Objective = Callable[[np.ndarray], Tuple[float, np.ndarray, Any]]


class DescentMethod(ABC):
    """
    One step of a descent method on the box [lower, upper].

    Implementations keep their own curvature history between calls;
    `reset` clears it (called at the start of every stage).
    """

    @abstractmethod
    def reset(self) -> None:
        pass

    @abstractmethod
    def step(
        self,
        fun: Objective,
        x: np.ndarray,
        value: float,
        gradient: np.ndarray,
        lower: float,
        upper: float,
    ) -> StepResult:
        """
        Take one projected step from x.

        Returns a StepResult with success=False when no decrease was found.
        """
        pass
