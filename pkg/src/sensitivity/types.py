"""
Sensitivity Types
=================
"""

from typing import List, Optional

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..state import NewtonResult


class SensitivityError(Exception):
    """Exception raised when the adjoint or design gradient fails."""

    def __init__(self, message: str, relative_residual: Optional[float] = None):
        self.message = message
        self.relative_residual = relative_residual
        super().__init__(self.message)

    def __str__(self) -> str:
        if self.relative_residual is not None:
            return f"{self.message} (relative residual {self.relative_residual:.3e})"
        return self.message


class AdjointVector(BaseModel):
    """ν with (∂r/∂q)ᵀν = −∇_q𝒥, in the residual layout [r1 | r2 | r3]."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    nu: np.ndarray
    relative_residual: float = Field(0.0, description="‖(∂r/∂q)ᵀν − rhs‖ / ‖rhs‖")

    @field_validator("nu", mode="before")
    @classmethod
    def as_vector(cls, value):
        arr = np.array(value, dtype=float).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise ValueError("adjoint vector is not finite")
        arr.flags.writeable = False
        return arr


class DesignJacobian(BaseModel):
    """∂r/∂α as a sparse (3n + n_e) × N² matrix."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: sp.csr_matrix

    @property
    def shape(self):
        return self.matrix.shape

    def column_rows(self, column: int) -> np.ndarray:
        """Rows with structural nonzeros in one design column."""
        col = self.matrix.tocsc()[:, column]
        return np.sort(col.indices)

    def transpose_product(self, nu: np.ndarray) -> np.ndarray:
        return np.asarray(self.matrix.T @ nu).reshape(-1)


class Evaluation(BaseModel):
    """Objective value, its parts and the design gradient at one design."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    tracking: float = Field(..., description="Tracking cost 𝒥")
    gray: float = Field(0.0, description="Gray-region penalty 𝒥_η")
    gradient: Optional[np.ndarray] = Field(None, description="∇_α(𝒥 + 𝒥_η), flat")
    newton: NewtonResult
    adjoint_residual: Optional[float] = None

    @property
    def total(self) -> float:
        return self.tracking + self.gray


class GradientCheckRow(BaseModel):
    """One design component of an adjoint-versus-finite-difference comparison."""

    component: int
    adjoint: float
    finite_difference: float
    relative_error: float
    newton_solves: int
    newton_iterations: int

    def row(self) -> list:
        return [
            self.component,
            self.adjoint,
            self.finite_difference,
            self.relative_error,
            self.newton_solves,
            self.newton_iterations,
        ]


class GradientCheckReport(BaseModel):
    rows: List[GradientCheckRow] = Field(default_factory=list)
    threshold: float = 1e-3

    @property
    def max_relative_error(self) -> float:
        return max((r.relative_error for r in self.rows), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_relative_error <= self.threshold
