"""
Objective module: target shapes and the shape functional.

The free boundary is compared with a star-like target through their polar
radius functions; an optional penalty suppresses gray regions where the
potential stays away from 1.
"""

from .types import GrayRegionReport, NonStarLikeError, ObjectiveError, RadiusSamples, TargetSpec
from .base import TargetShape
from .targets import CircleTarget, CosineKeyTarget, RoundedSquareTarget, UserTableTarget
from .cost import (
    DEFAULT_SAMPLES,
    PolarBrackets,
    boundary_radius,
    gray_penalty,
    gray_region_report,
    sample_angles,
    sample_count,
    tracking_cost,
    tracking_cost_and_gradient,
)

__all__ = [
    "GrayRegionReport",
    "NonStarLikeError",
    "ObjectiveError",
    "RadiusSamples",
    "TargetSpec",
    "TargetShape",
    "CircleTarget",
    "CosineKeyTarget",
    "RoundedSquareTarget",
    "UserTableTarget",
    "DEFAULT_SAMPLES",
    "PolarBrackets",
    "boundary_radius",
    "gray_penalty",
    "gray_region_report",
    "sample_angles",
    "sample_count",
    "tracking_cost",
    "tracking_cost_and_gradient",
]
