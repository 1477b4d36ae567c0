"""
Type definitions for the level set module.
"""

from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator


class LevelSetError(Exception):
    """Exception raised for level set parameterization errors."""

    def __init__(self, message: str, grid_size: Optional[int] = None):
        self.message = message
        self.grid_size = grid_size
        super().__init__(self.message)

    def __str__(self) -> str:
        if self.grid_size is not None:
            return f"[RbfGrid N={self.grid_size}] {self.message}"
        return self.message


class RbfGrid(BaseModel):
    """
    Regular N×N grid of Wendland RBF knots over the rectangle D.

    Knot (i, j) sits at x = x_min + j·(x_max − x_min)/(N − 1),
    y = y_min + i·(y_max − y_min)/(N − 1) and has flat index i·N + j.
    All knots share the support radius r_s = 4·max(Δx, Δy).
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=2, description="Knots per axis")
    x_min: float = Field(-2.0, description="Left edge of D")
    x_max: float = Field(2.0, description="Right edge of D")
    y_min: float = Field(-2.0, description="Bottom edge of D")
    y_max: float = Field(2.0, description="Top edge of D")

    _knots: np.ndarray = PrivateAttr()
    _quadtree: Any = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _check_rectangle(self) -> "RbfGrid":
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if not self.y_max > self.y_min:
            raise ValueError("y_max must exceed y_min")
        return self

    def model_post_init(self, __context) -> None:
        idx = np.arange(self.n)
        xs = self.x_min + idx * (self.x_max - self.x_min) / (self.n - 1)
        ys = self.y_min + idx * (self.y_max - self.y_min) / (self.n - 1)
        knots = np.empty((self.n * self.n, 2))
        knots[:, 0] = np.tile(xs, self.n)
        knots[:, 1] = np.repeat(ys, self.n)
        knots.flags.writeable = False
        self._knots = knots

    @property
    def size(self) -> int:
        """Number of design variables N²."""
        return self.n * self.n

    @property
    def knots(self) -> np.ndarray:
        """Knot coordinates, shape (N², 2), flat index i·N + j."""
        return self._knots

    @property
    def support_radius(self) -> float:
        """r_s = 4·max((x_max − x_min)/(N − 1), (y_max − y_min)/(N − 1))."""
        return 4.0 * max(
            (self.x_max - self.x_min) / (self.n - 1),
            (self.y_max - self.y_min) / (self.n - 1),
        )

    @property
    def quadtree(self):
        """Spatial index over the knots, built on first use."""
        if self._quadtree is None:
            from .quadtree import KnotQuadtree

            lo, hi = self.knots.min(axis=0), self.knots.max(axis=0)
            self._quadtree = KnotQuadtree.build(self.knots, (lo[0], lo[1], hi[0], hi[1]))
        return self._quadtree

    def flat_index(self, i: int, j: int) -> int:
        return i * self.n + j


class DesignVector(BaseModel):
    """
    RBF coefficients α (N×N) with the box bounds [α_min, α_max].

    The array is stored read-only; use `with_alpha` to derive a new design.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alpha: np.ndarray = Field(..., description="Coefficient array of shape (N, N)")
    alpha_min: float = Field(-1e20, description="Lower bound on every coefficient")
    alpha_max: float = Field(1e20, description="Upper bound on every coefficient")

    @field_validator("alpha", mode="before")
    @classmethod
    def _as_square_array(cls, value):
        arr = np.array(value, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"alpha must be a square 2D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("alpha contains non-finite entries")
        arr.flags.writeable = False
        return arr

    @model_validator(mode="after")
    def _check_bounds(self) -> "DesignVector":
        if not self.alpha_max > self.alpha_min:
            raise ValueError("alpha_max must exceed alpha_min")
        if np.any(self.alpha < self.alpha_min) or np.any(self.alpha > self.alpha_max):
            raise ValueError("alpha violates [alpha_min, alpha_max]")
        return self

    @classmethod
    def zeros(cls, n: int, alpha_min: float = -1e20, alpha_max: float = 1e20) -> "DesignVector":
        return cls(alpha=np.zeros((n, n)), alpha_min=alpha_min, alpha_max=alpha_max)

    @classmethod
    def from_flat(cls, flat: np.ndarray, alpha_min: float = -1e20, alpha_max: float = 1e20) -> "DesignVector":
        flat = np.asarray(flat, dtype=float)
        n = int(round(np.sqrt(flat.size)))
        if n * n != flat.size:
            raise LevelSetError(f"flat design of length {flat.size} is not a square grid")
        return cls(alpha=flat.reshape(n, n), alpha_min=alpha_min, alpha_max=alpha_max)

    @property
    def n(self) -> int:
        return self.alpha.shape[0]

    @property
    def flat(self) -> np.ndarray:
        """Coefficients in flat knot order i·N + j."""
        return self.alpha.reshape(-1)

    def project(self, flat: np.ndarray) -> np.ndarray:
        """Clip a flat coefficient vector into the box."""
        return np.clip(flat, self.alpha_min, self.alpha_max)

    def with_alpha(self, flat: np.ndarray) -> "DesignVector":
        """New design with the same bounds and projected coefficients."""
        return DesignVector(
            alpha=self.project(np.asarray(flat, dtype=float)).reshape(self.n, self.n),
            alpha_min=self.alpha_min,
            alpha_max=self.alpha_max,
        )


class SmoothingParams(BaseModel):
    """Gray-region smoothing: β(x) = δ‖∇ψ(x)‖ + floor, G_ε = H_β/ε."""

    model_config = ConfigDict(frozen=True)

    delta: float = Field(..., gt=0, description="Half width δ of the gray region")
    epsilon: float = Field(1e-3, gt=0, description="Penalty scale ε")
    floor: float = Field(1e-6, gt=0, description="Additive constant in β(x)")
