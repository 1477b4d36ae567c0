"""
RBF Level Set
=============

Wendland C² basis, level-set evaluation with exact spatial gradient,
smoothed Heaviside with adaptive width, and the initial interpolation fit.
"""

import logging
import math
from typing import Callable, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.sparse.linalg import splu

from .types import DesignVector, LevelSetError, RbfGrid, SmoothingParams

logger = logging.getLogger(__name__)

BETA_FLOOR = 1e-6
DENSE_LIMIT = 40
FIT_TOLERANCE = 1e-10


def wendland(r):
    """max{0, 1 − r}⁴·(4r + 1) for r ≥ 0."""
    r = np.asarray(r, dtype=float)
    value = np.maximum(0.0, 1.0 - r) ** 4 * (4.0 * r + 1.0)
    return float(value) if value.ndim == 0 else value


def wendland_derivative(r):
    """d/dr of the Wendland function: −20 r (1 − r)³ inside the support."""
    r = np.asarray(r, dtype=float)
    value = -20.0 * r * np.maximum(0.0, 1.0 - r) ** 3
    return float(value) if value.ndim == 0 else value


def quadtree_query(grid: RbfGrid, x) -> np.ndarray:
    """Flat indices of every knot whose support can contain x."""
    return grid.quadtree.query_radius(x, grid.support_radius)


def _terms(grid: RbfGrid, alpha: np.ndarray, x: np.ndarray, idx: np.ndarray):
    diff = x[None, :] - grid.knots[idx]
    dist = np.sqrt(np.sum(diff * diff, axis=1))
    r = dist / grid.support_radius
    inside = np.maximum(0.0, 1.0 - r)
    inside3 = inside * inside * inside
    value = alpha[idx] * (inside3 * inside) * (4.0 * r + 1.0)
    grad = (alpha[idx] * -20.0 * inside3 / (grid.support_radius * grid.support_radius))[:, None] * diff
    return value, grad


def eval_levelset(grid: RbfGrid, design: DesignVector, x) -> Tuple[float, np.ndarray]:
    """
    Evaluate ψ_N(x) = Σ α_ij ψ_ij(x) and its spatial gradient.

    Only the knots returned by the quadtree are visited. Sums use
    `math.fsum`, so the result does not depend on which non-contributing
    knots are visited.

    Returns:
        (value, gradient) with gradient of shape (2,)
    """
    x = np.asarray(x, dtype=float)
    idx = quadtree_query(grid, x)
    if idx.size == 0:
        return 0.0, np.zeros(2)
    value, grad = _terms(grid, design.flat, x, idx)
    return math.fsum(value), np.array([math.fsum(grad[:, 0]), math.fsum(grad[:, 1])])


def eval_levelset_bruteforce(grid: RbfGrid, design: DesignVector, x) -> Tuple[float, np.ndarray]:
    """Same as `eval_levelset` but scanning all knots."""
    x = np.asarray(x, dtype=float)
    value, grad = _terms(grid, design.flat, x, np.arange(grid.size))
    return math.fsum(value), np.array([math.fsum(grad[:, 0]), math.fsum(grad[:, 1])])


def eval_levelset_many(grid: RbfGrid, design: DesignVector, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorized ψ and ∇ψ at an (m, 2) array of points.

    Candidate knots are gathered per point from the quadtree and padded;
    sums use ordinary floating point addition.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    lists = [quadtree_query(grid, p) for p in points]
    width = max((len(c) for c in lists), default=0)
    values = np.zeros(len(points))
    grads = np.zeros((len(points), 2))
    if width == 0:
        return values, grads

    cand = np.zeros((len(points), width), dtype=np.int64)
    mask = np.zeros((len(points), width), dtype=bool)
    for m, c in enumerate(lists):
        cand[m, : len(c)] = c
        mask[m, : len(c)] = True

    alpha = np.where(mask, design.flat[cand], 0.0)
    diff = points[:, None, :] - grid.knots[cand]
    r = np.sqrt(np.sum(diff * diff, axis=2)) / grid.support_radius
    inside = np.maximum(0.0, 1.0 - r)
    inside3 = inside * inside * inside
    values = np.sum(alpha * (inside3 * inside) * (4.0 * r + 1.0), axis=1)
    grads = np.sum((alpha * -20.0 * inside3 / (grid.support_radius * grid.support_radius))[:, :, None] * diff, axis=1)
    return values, grads


def smoothed_heaviside(y, beta):
    """
    C¹ smoothed Heaviside step.

    0 for y < −β, 1 for y > β, (3/4)(y/β − y³/(3β³)) + 1/2 in between.
    """
    y = np.asarray(y, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if np.any(beta <= 0):
        raise LevelSetError("smoothing parameter beta must be positive")
    t = np.clip(y / beta, -1.0, 1.0)
    value = 0.75 * (t - t**3 / 3.0) + 0.5
    value = np.where(y > beta, 1.0, np.where(y < -beta, 0.0, value))
    return float(value) if value.ndim == 0 else value


def smoothed_heaviside_derivative(y, beta):
    """∂H_β/∂y = (3/4)(1/β − y²/β³) inside the band, 0 outside."""
    y = np.asarray(y, dtype=float)
    beta = np.asarray(beta, dtype=float)
    value = np.where(np.abs(y) <= beta, 0.75 * (1.0 / beta - y**2 / beta**3), 0.0)
    return float(value) if value.ndim == 0 else value


def adaptive_beta(grid: RbfGrid, design: DesignVector, x, delta: float, floor: float = BETA_FLOOR) -> float:
    """β(x) = δ‖∇ψ(x)‖ + 1e-6."""
    if not delta > 0:
        raise LevelSetError("gray-region half width delta must be positive", grid.n)
    _, grad = eval_levelset(grid, design, x)
    return delta * float(np.hypot(grad[0], grad[1])) + floor


def heaviside_field(grid: RbfGrid, design: DesignVector, points: np.ndarray, smoothing: SmoothingParams, scale: float = 1.0) -> np.ndarray:
    """H_{scale·β}(ψ) at many points."""
    values, grads = eval_levelset_many(grid, design, points)
    beta = scale * (smoothing.delta * np.linalg.norm(grads, axis=1) + smoothing.floor)
    return np.asarray(smoothed_heaviside(values, beta))


def radial_heaviside(
    grid: RbfGrid,
    design: DesignVector,
    radii: np.ndarray,
    smoothing: SmoothingParams,
    angles: int = 64,
    center=(0.0, 0.0),
) -> np.ndarray:
    """Mean of H_β(ψ) over `angles` uniform directions on each circle of the given radii."""
    theta = 2.0 * np.pi * (np.arange(angles) + 0.5) / angles
    directions = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    radii = np.asarray(radii, dtype=float)
    points = np.asarray(center, dtype=float) + radii[:, None, None] * directions[None, :, :]
    values = heaviside_field(grid, design, points.reshape(-1, 2), smoothing)
    return values.reshape(radii.size, angles).mean(axis=1)


def gray_fraction(heaviside_values: np.ndarray) -> float:
    """Share of values strictly inside (0, 1)."""
    h = np.asarray(heaviside_values, dtype=float)
    if h.size == 0:
        return 0.0
    return float(np.mean((h > 0.0) & (h < 1.0)))


def interpolation_matrix(grid: RbfGrid):
    """Sparse Wendland Gram matrix A[k, l] = W(‖x_k − x_l‖ / r_s)."""
    rows, cols, vals = [], [], []
    for k, knot in enumerate(grid.knots):
        idx = quadtree_query(grid, knot)
        r = np.linalg.norm(grid.knots[idx] - knot, axis=1) / grid.support_radius
        w = np.maximum(0.0, 1.0 - r) ** 4 * (4.0 * r + 1.0)
        keep = w > 0.0
        rows.append(np.full(int(keep.sum()), k))
        cols.append(idx[keep])
        vals.append(w[keep])
    n = grid.size
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


def fit_initial_alpha(
    grid: RbfGrid,
    target: Optional[Union[Callable[[np.ndarray], np.ndarray], np.ndarray]] = None,
    alpha_min: float = -1e20,
    alpha_max: float = 1e20,
) -> DesignVector:
    """
    Interpolate a scalar field at the knots: ψ_N(knot_ij) = target(knot_ij).

    Args:
        grid: knot grid
        target: callable on an (N², 2) array, or the values themselves;
            defaults to the unit-disk level set 1 − ‖x‖
        alpha_min, alpha_max: design bounds

    Raises:
        LevelSetError: factorization failure, knot residual above 1e-10,
            or a solution outside the bounds.
    """
    if target is None:
        from ..analytic import circle_levelset

        def target(points):
            return circle_levelset(points, 1.0)

    rhs = np.asarray(target(grid.knots) if callable(target) else target, dtype=float).reshape(-1)
    if rhs.shape != (grid.size,):
        raise LevelSetError(f"target has {rhs.size} values, expected {grid.size}", grid.n)

    matrix = interpolation_matrix(grid)
    try:
        if grid.n <= DENSE_LIMIT:
            alpha = cho_solve(cho_factor(matrix.toarray()), rhs)
        else:
            alpha = splu(matrix.tocsc()).solve(rhs)
    except (LinAlgError, RuntimeError) as e:
        raise LevelSetError(f"interpolation system could not be factorized: {e}", grid.n)

    residual = float(np.max(np.abs(matrix @ alpha - rhs), initial=0.0))
    logger.debug(f"Initial fit on {grid.n}x{grid.n} knots: residual {residual:.3e}")
    if not residual <= FIT_TOLERANCE:
        raise LevelSetError(f"interpolation residual {residual:.3e} exceeds {FIT_TOLERANCE:g}", grid.n)
    if np.any(alpha < alpha_min) or np.any(alpha > alpha_max):
        raise LevelSetError("fitted coefficients fall outside the design bounds", grid.n)

    return DesignVector(alpha=alpha.reshape(grid.n, grid.n), alpha_min=alpha_min, alpha_max=alpha_max)
