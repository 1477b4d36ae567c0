"""
Objective Types
===============

Target specifications, sampled radius functions and the objective errors.
"""

from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class ObjectiveError(Exception):
    """Exception raised while evaluating the shape objective."""

    def __init__(self, message: str, target: Optional[str] = None):
        self.message = message
        self.target = target
        super().__init__(self.message)

    def __str__(self) -> str:
        if self.target:
            return f"[{self.target}] {self.message}"
        return self.message


class NonStarLikeError(ObjectiveError):
    """A ray from the center crosses the free boundary more than once."""

    def __init__(self, message: str, node: Optional[int] = None):
        self.node = node
        super().__init__(message if node is None else f"{message} (boundary position {node})")


class TargetSpec(BaseModel):
    """
    Selector and parameters of the target free boundary.

    kind:
        circle          g_t ≡ radius (defaults to C(1, γ) when omitted)
        rounded_square  square of `side` with corner arcs of `corner_radius`
        cosine_key      g_t = a cos θ + b cos 2θ + c
        user_table      (θ, g_t) pairs read from `table` (CSV)
    """

    kind: Literal["circle", "rounded_square", "cosine_key", "user_table"] = Field(
        "circle", description="Target family"
    )
    radius: Optional[float] = Field(None, gt=0, description="Circle radius")
    side: float = Field(4.0, gt=0, description="Rounded square side length")
    corner_radius: float = Field(1.0, ge=0, description="Rounded square corner radius")
    coefficients: Tuple[float, float, float] = Field(
        (0.5, 0.8, 2.0), description="Cosine key (a, b, c) in a cos θ + b cos 2θ + c"
    )
    table: Optional[str] = Field(None, description="CSV file with (theta, radius) rows")
    center: Tuple[float, float] = Field((0.0, 0.0), description="Center of the polar radius function")

    @model_validator(mode="after")
    def _check_kind(self) -> "TargetSpec":
        if self.kind == "rounded_square" and self.corner_radius > self.side / 2:
            raise ValueError("corner_radius must not exceed half the side")
        if self.kind == "user_table" and not self.table:
            raise ValueError("user_table target needs a table path")
        if self.kind == "cosine_key":
            a, b, c = self.coefficients
            if c <= abs(a) + abs(b):
                raise ValueError("cosine key radius must stay positive (c > |a| + |b|)")
        return self


class RadiusSamples(BaseModel):
    """Radius function sampled on the uniform angle grid."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    thetas: np.ndarray
    values: np.ndarray

    @field_validator("thetas", "values", mode="before")
    @classmethod
    def as_vector(cls, value):
        arr = np.array(value, dtype=float).reshape(-1)
        arr.flags.writeable = False
        return arr

    @model_validator(mode="after")
    def _check(self) -> "RadiusSamples":
        if self.thetas.shape != self.values.shape:
            raise ValueError("thetas and values differ in length")
        if np.any(self.values <= 0):
            raise ValueError("radius samples must be positive")
        return self

    @property
    def count(self) -> int:
        return self.thetas.size


class GrayRegionReport(BaseModel):
    """Potential inside the gray band 0 < H_β(ψ) < 1 at the nodes."""

    nodes: int = Field(..., description="Nodes in the gray band")
    fraction: float = Field(..., description="Share of all nodes in the gray band")
    u_min: Optional[float] = None
    u_max: Optional[float] = None
    max_deviation: Optional[float] = Field(None, description="max |u − 1| over gray nodes")
