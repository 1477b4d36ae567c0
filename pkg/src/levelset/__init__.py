"""
Level set module: the design parameterization.

ω = {x : ψ_N(x) > 0} with ψ_N a combination of compactly supported Wendland
RBFs on a regular knot grid. The coefficients α are the optimization
variables; a quadtree keeps evaluation local to the covering supports.
"""

from .types import DesignVector, LevelSetError, RbfGrid, SmoothingParams
from .quadtree import KnotQuadtree
from .rbf import (
    adaptive_beta,
    eval_levelset,
    eval_levelset_bruteforce,
    eval_levelset_many,
    fit_initial_alpha,
    gray_fraction,
    heaviside_field,
    interpolation_matrix,
    quadtree_query,
    radial_heaviside,
    smoothed_heaviside,
    smoothed_heaviside_derivative,
    wendland,
    wendland_derivative,
)

__all__ = [
    "DesignVector",
    "LevelSetError",
    "RbfGrid",
    "SmoothingParams",
    "KnotQuadtree",
    "adaptive_beta",
    "eval_levelset",
    "eval_levelset_bruteforce",
    "eval_levelset_many",
    "fit_initial_alpha",
    "gray_fraction",
    "heaviside_field",
    "interpolation_matrix",
    "quadtree_query",
    "radial_heaviside",
    "smoothed_heaviside",
    "smoothed_heaviside_derivative",
    "wendland",
    "wendland_derivative",
]
