"""
Knot Quadtree
=============

Region quadtree over the RBF knots. A radius query prunes every cell whose
box lies farther than the radius from the query point, so evaluating ψ only
touches knots whose support can reach the point.
"""

from __future__ import annotations

import dataclasses
from typing import List, Optional, Sequence, Tuple

import numpy as np

LEAF_CAPACITY = 8
MAX_DEPTH = 12

# Relative slack on the squared radius test; results stay a superset.
RADIUS_SLACK = 1e-12


@dataclasses.dataclass
class KnotQuadtree:
    """
    Quadtree cell holding knot indices.

    Attributes:
        x, y: lower-left corner of the cell
        w, h: cell width and height
        points: coordinates of all knots (shared by every cell)
        items: knot indices stored in this leaf
        children: four sub-cells once split
    """

    x: float
    y: float
    w: float
    h: float
    points: np.ndarray = dataclasses.field(repr=False)
    depth: int = 0
    cap: int = LEAF_CAPACITY
    max_depth: int = MAX_DEPTH
    items: List[int] = dataclasses.field(default_factory=list)
    children: Optional[List["KnotQuadtree"]] = dataclasses.field(default=None, repr=False)

    @classmethod
    def build(
        cls,
        points: np.ndarray,
        bounds: Tuple[float, float, float, float],
        cap: int = LEAF_CAPACITY,
        max_depth: int = MAX_DEPTH,
    ) -> "KnotQuadtree":
        """Insert every point of `points` into a tree covering `bounds` (x0, y0, x1, y1)."""
        x0, y0, x1, y1 = bounds
        root = cls(x0, y0, x1 - x0, y1 - y0, points=np.asarray(points, dtype=float), cap=cap, max_depth=max_depth)
        for k in range(len(root.points)):
            if not root.insert(k):
                raise ValueError(f"knot {k} lies outside the quadtree bounds")
        return root

    def _contains(self, px: float, py: float) -> bool:
        return self.x <= px <= self.x + self.w and self.y <= py <= self.y + self.h

    def insert(self, k: int) -> bool:
        px, py = self.points[k]
        if not self._contains(px, py):
            return False

        if (self.children is None and len(self.items) < self.cap) or self.depth >= self.max_depth:
            self.items.append(k)
            return True

        if self.children is None:
            self._split()

        return any(child.insert(k) for child in self.children)

    def _split(self) -> None:
        hw, hh = self.w / 2, self.h / 2
        args = dict(points=self.points, depth=self.depth + 1, cap=self.cap, max_depth=self.max_depth)
        self.children = [
            KnotQuadtree(self.x, self.y, hw, hh, **args),
            KnotQuadtree(self.x + hw, self.y, hw, hh, **args),
            KnotQuadtree(self.x, self.y + hh, hw, hh, **args),
            KnotQuadtree(self.x + hw, self.y + hh, hw, hh, **args),
        ]
        for k in self.items:
            for child in self.children:
                if child.insert(k):
                    break
        self.items = []

    def _query(self, px: float, py: float, r2: float, out: List[int]) -> None:
        cx = max(self.x, min(px, self.x + self.w))
        cy = max(self.y, min(py, self.y + self.h))
        if (cx - px) ** 2 + (cy - py) ** 2 > r2:
            return

        if self.children is None:
            for k in self.items:
                kx, ky = self.points[k]
                if (kx - px) ** 2 + (ky - py) ** 2 <= r2:
                    out.append(k)
        else:
            for child in self.children:
                child._query(px, py, r2, out)

    def query_radius(self, center: Sequence[float], radius: float) -> np.ndarray:
        """Sorted indices of all knots within `radius` of `center` (a superset at the boundary)."""
        out: List[int] = []
        self._query(float(center[0]), float(center[1]), radius * radius * (1.0 + RADIUS_SLACK), out)
        return np.array(sorted(out), dtype=np.int64)

    def depth_reached(self) -> int:
        if self.children is None:
            return self.depth
        return max(child.depth_reached() for child in self.children)
