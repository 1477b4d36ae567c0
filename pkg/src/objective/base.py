"""
Base class for target shapes.
"""

from abc import ABC, abstractmethod

import numpy as np

from .types import ObjectiveError, TargetSpec


class TargetShape(ABC):
    """
    Star-like target boundary given by its polar radius g_t(θ) > 0.

    Subclasses implement `radius`; everything else derives from it.
    """

    kind: str = "target"

    @abstractmethod
    def radius(self, theta: np.ndarray) -> np.ndarray:
        """g_t at angles `theta` (any real values; 2π-periodic)."""
        pass

    def samples(self, thetas: np.ndarray) -> np.ndarray:
        values = np.asarray(self.radius(np.asarray(thetas, dtype=float)), dtype=float)
        if np.any(values <= 0):
            raise ObjectiveError("target radius must be positive", self.kind)
        return values

    def curve(self, count: int = 512, center=(0.0, 0.0)) -> np.ndarray:
        """Closed polyline of the target boundary, shape (count, 2)."""
        theta = 2.0 * np.pi * np.arange(count) / count
        r = self.samples(theta)
        return np.stack([center[0] + r * np.cos(theta), center[1] + r * np.sin(theta)], axis=1)

    @staticmethod
    def from_spec(spec: TargetSpec, gamma: float = -1.0) -> "TargetShape":
        """Instantiate the target described by a `TargetSpec`."""
        from .targets import CircleTarget, CosineKeyTarget, RoundedSquareTarget, UserTableTarget

        if spec.kind == "circle":
            if spec.radius is None:
                from ..analytic import bernoulli_radius

                return CircleTarget(bernoulli_radius(1.0, gamma))
            return CircleTarget(spec.radius)
        if spec.kind == "rounded_square":
            return RoundedSquareTarget(spec.side, spec.corner_radius)
        if spec.kind == "cosine_key":
            return CosineKeyTarget(*spec.coefficients)
        if spec.kind == "user_table":
            return UserTableTarget.from_csv(spec.table)
        raise ObjectiveError(f"unknown target kind {spec.kind!r}")
