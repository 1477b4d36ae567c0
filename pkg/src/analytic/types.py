"""
Analytic Types
==============

Pydantic models and errors for the closed-form annulus solution of the
exterior Bernoulli problem.
"""

from typing import Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator


class AnalyticError(Exception):
    """
    Raised when the closed-form solution cannot be produced.

    Attributes:
        message: Human-readable description
        inner_radius: R of the offending request, if known
        gamma: γ of the offending request, if known
    """

    def __init__(
        self,
        message: str,
        inner_radius: Optional[float] = None,
        gamma: Optional[float] = None,
    ):
        super().__init__(message)
        self.message = message
        self.inner_radius = inner_radius
        self.gamma = gamma

    def __str__(self) -> str:
        if self.inner_radius is None and self.gamma is None:
            return self.message
        return f"{self.message} (R={self.inner_radius}, gamma={self.gamma})"


class AnnulusSolution(BaseModel):
    """
    Exact solution for a circular inclusion ω = B(0, R).

    The free boundary is the circle of radius C where
    C·ln(C) − C·ln(R) = −1/γ, and the potential is
    u(x) = Cγ·ln‖x‖ − Cγ·ln(R) + 1.

    Attributes:
        inner_radius: R, radius of the inclusion
        gamma: prescribed normal flux on the free boundary (negative)
        outer_radius: C, radius of the free boundary
    """

    model_config = {"frozen": True}

    inner_radius: float = Field(..., gt=0, description="Radius R of the inclusion")
    gamma: float = Field(..., lt=0, description="Normal flux γ on the free boundary")
    outer_radius: float = Field(..., gt=0, description="Free boundary radius C")

    @model_validator(mode="after")
    def _check_encloses(self) -> "AnnulusSolution":
        if self.outer_radius <= self.inner_radius:
            raise ValueError("outer_radius must exceed inner_radius")
        return self

    @classmethod
    def solve(cls, inner_radius: float, gamma: float) -> "AnnulusSolution":
        """Solve for C and bundle it with (R, γ)."""
        from .annulus import bernoulli_radius

        return cls(
            inner_radius=inner_radius,
            gamma=gamma,
            outer_radius=bernoulli_radius(inner_radius, gamma),
        )

    @property
    def residual(self) -> float:
        """|C ln C − C ln R + 1/γ|, the defect of the radius equation."""
        c, r = self.outer_radius, self.inner_radius
        return abs(c * np.log(c) - c * np.log(r) + 1.0 / self.gamma)

    def potential(self, points):
        """Evaluate u at one point or an (..., 2) array of points."""
        from .annulus import annulus_potential

        return annulus_potential(points, self.inner_radius, self.gamma, outer_radius=self.outer_radius)

    def flux(self, points):
        """Radial derivative ∂u/∂r = Cγ/‖x‖."""
        radius = np.linalg.norm(np.asarray(points, dtype=float), axis=-1)
        if np.any(radius == 0.0):
            raise AnalyticError("flux undefined at the origin", self.inner_radius, self.gamma)
        return self.outer_radius * self.gamma / radius
