"""
Closed least-squares cubic B-spline fit of a boundary polygon.
"""

import logging
from typing import Optional

import numpy as np
from scipy.interpolate import BSpline

from .topology import segments_intersect
from .types import BoundaryCurve, SplineFitError

logger = logging.getLogger(__name__)

MIN_POINTS = 8
MIN_CONTROL = 16


def control_count(n_points: int) -> int:
    """max(16, n/4) control points, never more than data points."""
    return min(max(MIN_CONTROL, n_points // 4), n_points)


def periodic_design_matrix(params: np.ndarray, n_control: int) -> np.ndarray:
    """
    Collocation matrix of the closed uniform cubic basis.

    The last three of the m + 3 basis functions repeat the first three
    control points, so their columns fold onto columns 0..2.
    """
    knots = np.arange(-3, n_control + 4) / n_control
    full = BSpline.design_matrix(params, knots, 3).toarray()
    design = full[:, :n_control].copy()
    design[:, :3] += full[:, n_control:]
    return design


def fit_boundary_spline(points: np.ndarray, n_control: Optional[int] = None) -> BoundaryCurve:
    """
    Fit a closed cubic B-spline to an ordered closed polygon by least squares.

    Data parameters are normalized cumulative chord lengths in [0, 1).

    Raises:
        SplineFitError: fewer than 8 points, repeated points or a
            self-intersecting polygon.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < MIN_POINTS:
        raise SplineFitError(f"need at least {MIN_POINTS} boundary points, got {n}", n)
    chords = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    if np.any(chords <= 0.0):
        raise SplineFitError("boundary contains repeated points", n)
    if segments_intersect(pts):
        raise SplineFitError("boundary polygon intersects itself", n)

    m = control_count(n) if n_control is None else int(n_control)
    if m < 4 or m > n:
        raise SplineFitError(f"invalid control point count {m} for {n} points", n)

    params = np.concatenate([[0.0], np.cumsum(chords)[:-1]]) / np.sum(chords)
    design = periodic_design_matrix(params, m)
    control, _, rank, _ = np.linalg.lstsq(design, pts, rcond=None)
    if rank < m:
        logger.warning(f"Boundary spline fit is rank deficient ({rank} of {m})")

    curve = BoundaryCurve(control_points=control, knots=np.arange(-3, m + 4) / m)
    deviation = float(np.max(np.linalg.norm(curve(params) - pts, axis=1)))
    logger.debug(f"Boundary spline: {n} points, {m} control points, max deviation {deviation:.3e}")
    return curve
