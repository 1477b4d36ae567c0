"""
Analytic module for the closed-form annulus solution.

For a circular inclusion ω = B(0, R) the exterior Bernoulli problem has an
explicit solution: a concentric free boundary of radius C(R, γ) and a
logarithmic potential. It seeds the initial domain and level set and serves
as the verification oracle, also for the penalized problem with a radial
smoothed inclusion.
"""

from .types import AnalyticError, AnnulusSolution
from .annulus import (
    annulus_potential,
    annulus_state,
    bernoulli_radius,
    circle_levelset,
    penalized_annulus,
)

__all__ = [
    "AnalyticError",
    "AnnulusSolution",
    "annulus_potential",
    "annulus_state",
    "bernoulli_radius",
    "circle_levelset",
    "penalized_annulus",
]
