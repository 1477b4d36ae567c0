"""
Mesh Types
==========

Triangulations, boundary curves and the mesh error family.
"""

from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.interpolate import BSpline


class MeshError(Exception):
    """Exception raised for mesh generation and mesh validity errors."""

    def __init__(self, message: str, node_count: Optional[int] = None):
        self.message = message
        self.node_count = node_count
        super().__init__(self.message)

    def __str__(self) -> str:
        if self.node_count is not None:
            return f"{self.message} (nodes={self.node_count})"
        return self.message


class InvertedElementError(MeshError):
    """A triangle with signed area ≤ 0 after deformation."""

    def __init__(self, triangle: int, area: float):
        self.triangle = int(triangle)
        self.area = float(area)
        super().__init__(f"triangle {self.triangle} inverted (signed area {self.area:.3e})")


class SplineFitError(MeshError):
    """Boundary spline could not be fitted."""


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class Mesh(BaseModel):
    """
    P1 triangulation with a single ordered outer boundary loop.

    Attributes:
        nodes: (n, 2) coordinates
        triangles: (n_t, 3) node indices, counterclockwise
        boundary: ordered loop of boundary node indices (counterclockwise)
        h: characteristic mesh size
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    nodes: np.ndarray = Field(..., description="Node coordinates (n, 2)")
    triangles: np.ndarray = Field(..., description="Triangle connectivity (n_t, 3)")
    boundary: np.ndarray = Field(..., description="Outer boundary loop")
    h: float = Field(..., gt=0, description="Characteristic mesh size")

    @field_validator("nodes", mode="before")
    @classmethod
    def _nodes_array(cls, value):
        arr = np.array(value, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError(f"nodes must have shape (n, 2), got {arr.shape}")
        return _readonly(arr)

    @field_validator("triangles", mode="before")
    @classmethod
    def _triangles_array(cls, value):
        arr = np.array(value, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ValueError(f"triangles must have shape (n_t, 3), got {arr.shape}")
        return _readonly(arr)

    @field_validator("boundary", mode="before")
    @classmethod
    def _boundary_array(cls, value):
        arr = np.array(value, dtype=np.int64).reshape(-1)
        if arr.size < 3:
            raise ValueError("boundary loop needs at least 3 nodes")
        return _readonly(arr)

    @model_validator(mode="after")
    def _check_indices(self) -> "Mesh":
        n = len(self.nodes)
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= n):
            raise ValueError("triangle index out of range")
        if self.boundary.min() < 0 or self.boundary.max() >= n:
            raise ValueError("boundary index out of range")
        if len(np.unique(self.boundary)) != len(self.boundary):
            raise ValueError("boundary loop visits a node twice")
        return self

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_boundary(self) -> int:
        return len(self.boundary)

    @property
    def boundary_points(self) -> np.ndarray:
        return self.nodes[self.boundary]

    @property
    def boundary_edges(self) -> np.ndarray:
        """(n_e, 2) consecutive pairs of the loop, closing back to the start."""
        return np.stack([self.boundary, np.roll(self.boundary, -1)], axis=1)

    def signed_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def area(self) -> float:
        return float(np.sum(self.signed_areas()))

    def inverted_elements(self) -> np.ndarray:
        return np.flatnonzero(self.signed_areas() <= 0.0)

    def with_nodes(self, nodes: np.ndarray) -> "Mesh":
        return Mesh(nodes=nodes, triangles=self.triangles, boundary=self.boundary, h=self.h)


class BoundaryCurve(BaseModel):
    """
    Closed cubic B-spline x(s), s ∈ [0, 1), with periodic control points.

    Attributes:
        control_points: (m, 2) free control points; the spline wraps the
            first three to close the curve
        knots: uniform knot vector arange(−3, m + 4)/m
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    control_points: np.ndarray = Field(..., description="Periodic control points (m, 2)")
    knots: np.ndarray = Field(..., description="Uniform knot vector")

    @model_validator(mode="after")
    def _check_shapes(self) -> "BoundaryCurve":
        m = len(self.control_points)
        if len(self.knots) != m + 7:
            raise ValueError(f"expected {m + 7} knots for {m} control points, got {len(self.knots)}")
        return self

    @property
    def spline(self) -> BSpline:
        coeffs = np.vstack([self.control_points, self.control_points[:3]])
        return BSpline(self.knots, coeffs, 3, extrapolate="periodic")

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return self.spline(np.mod(s, 1.0) if s.ndim else float(np.mod(s, 1.0)))

    def length(self, samples_per_span: int = 64) -> float:
        _, cumulative = self.arclength_table(samples_per_span)
        return float(cumulative[-1])

    def arclength_table(self, samples_per_span: int = 64):
        """Dense parameter samples on [0, 1] and cumulative chord length."""
        s = np.linspace(0.0, 1.0, samples_per_span * len(self.control_points) + 1)
        pts = self.spline(s)
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        return s, np.concatenate([[0.0], np.cumsum(seg)])

    def resample(self, spacing: float, min_points: int = 8) -> np.ndarray:
        """Points at uniform arclength spacing ≈ `spacing`, starting at s = 0."""
        s, cumulative = self.arclength_table()
        total = cumulative[-1]
        count = max(min_points, int(round(total / spacing)))
        targets = np.arange(count) * (total / count)
        return self.spline(np.interp(targets, cumulative, s))
