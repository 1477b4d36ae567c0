"""
Target shapes: circle, rounded square, cosine key and tabulated radius.
"""

import csv
from pathlib import Path
from typing import Union

import numpy as np

from .base import TargetShape
from .types import ObjectiveError


class CircleTarget(TargetShape):
    kind = "circle"

    def __init__(self, radius: float):
        if not radius > 0:
            raise ObjectiveError("circle radius must be positive", self.kind)
        self.value = float(radius)

    def radius(self, theta):
        return np.full(np.shape(theta), self.value)


class RoundedSquareTarget(TargetShape):
    """
    Axis-aligned square of side s centered at the origin with corners
    replaced by quarter circles of radius ρ.
    """

    kind = "rounded_square"

    def __init__(self, side: float, corner_radius: float):
        if not side > 0 or corner_radius < 0 or corner_radius > side / 2:
            raise ObjectiveError("need side > 0 and 0 <= corner_radius <= side/2", self.kind)
        self.half = 0.5 * float(side)
        self.corner = float(corner_radius)

    def radius(self, theta):
        theta = np.asarray(theta, dtype=float)
        # fold into [0, π/4] by the square's symmetries
        phi = np.mod(theta, 0.5 * np.pi)
        phi = np.minimum(phi, 0.5 * np.pi - phi)
        a, rho = self.half, self.corner
        flat = a / np.cos(phi)
        center = a - rho
        along = center * (np.cos(phi) + np.sin(phi))
        disc = np.maximum(along**2 - 2.0 * center**2 + rho**2, 0.0)
        arc = along + np.sqrt(disc)
        return np.where(a * np.tan(phi) <= center, flat, arc)


class CosineKeyTarget(TargetShape):
    """g_t(θ) = a cos θ + b cos 2θ + c."""

    kind = "cosine_key"

    def __init__(self, a: float = 0.5, b: float = 0.8, c: float = 2.0):
        if c <= abs(a) + abs(b):
            raise ObjectiveError("radius a cos θ + b cos 2θ + c must stay positive", self.kind)
        self.a, self.b, self.c = float(a), float(b), float(c)

    def radius(self, theta):
        theta = np.asarray(theta, dtype=float)
        return self.a * np.cos(theta) + self.b * np.cos(2.0 * theta) + self.c


class UserTableTarget(TargetShape):
    """Tabulated (θ, g_t) pairs, periodic linear interpolation."""

    kind = "user_table"

    def __init__(self, thetas, radii):
        thetas = np.mod(np.asarray(thetas, dtype=float), 2.0 * np.pi)
        radii = np.asarray(radii, dtype=float)
        if thetas.size < 3 or thetas.shape != radii.shape:
            raise ObjectiveError("table needs at least 3 (theta, radius) pairs", self.kind)
        if np.any(radii <= 0):
            raise ObjectiveError("table radii must be positive", self.kind)
        order = np.argsort(thetas)
        self.thetas, self.radii = thetas[order], radii[order]
        if np.any(np.diff(self.thetas) <= 0):
            raise ObjectiveError("table angles must be distinct modulo 2π", self.kind)

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "UserTableTarget":
        rows = []
        with open(path, newline="") as f:
            for row in csv.reader(f):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except (ValueError, IndexError):
                    if rows:
                        raise ObjectiveError(f"malformed row {row!r} in {path}", cls.kind)
                    # header line
        if not rows:
            raise ObjectiveError(f"no data rows in {path}", cls.kind)
        data = np.array(rows)
        return cls(data[:, 0], data[:, 1])

    def radius(self, theta):
        return np.interp(np.mod(np.asarray(theta, dtype=float), 2.0 * np.pi), self.thetas, self.radii, period=2.0 * np.pi)
