"""
Annulus Oracle
==============

Closed-form solution of the exterior Bernoulli problem for a circular
inclusion. Used to build the initial reference domain, the initial level
set, the Newton warm start and as the verification oracle.
"""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy import special
from scipy.integrate import solve_ivp

from .types import AnalyticError, AnnulusSolution

logger = logging.getLogger(__name__)

# Geometric bracket expansions before giving up.
MAX_EXPANSIONS = 200
MAX_BISECTIONS = 400


def _radius_defect(c: float, inner_radius: float, gamma: float) -> float:
    return c * np.log(c) - c * np.log(inner_radius) + 1.0 / gamma


def bernoulli_radius(inner_radius: float, gamma: float) -> float:
    """
    Free boundary radius C(R, γ) of the annulus solution.

    Solves C·ln(C) − C·ln(R) = −1/γ by bracketing bisection. The left side
    is increasing in C for C > R, so the root above R is unique.

    Args:
        inner_radius: R > 0
        gamma: γ < 0

    Returns:
        C > R with |C ln C − C ln R + 1/γ| at machine precision.

    Raises:
        AnalyticError: invalid parameters or no sign change found.
    """
    if not inner_radius > 0:
        raise AnalyticError("inner radius must be positive", inner_radius, gamma)
    if not gamma < 0:
        raise AnalyticError("gamma must be negative", inner_radius, gamma)

    lo = inner_radius * (1.0 + 1e-9)
    if _radius_defect(lo, inner_radius, gamma) >= 0.0:
        # γ → −∞ pushes the root into (R, lo]
        lo, hi = inner_radius, lo
    else:
        hi = lo * np.e
        expansions = 0
        while _radius_defect(hi, inner_radius, gamma) < 0.0:
            lo, hi = hi, 2.0 * hi
            expansions += 1
            if expansions > MAX_EXPANSIONS or not np.isfinite(hi):
                raise AnalyticError("no sign change in radius equation", inner_radius, gamma)

    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _radius_defect(mid, inner_radius, gamma) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break

    # pick whichever end of the final bracket has the smaller defect
    c = hi if abs(_radius_defect(hi, inner_radius, gamma)) <= abs(_radius_defect(lo, inner_radius, gamma)) else lo
    if not c > inner_radius:
        raise AnalyticError("root collapsed onto the inclusion radius", inner_radius, gamma)
    return float(c)


def annulus_potential(
    points,
    inner_radius: float,
    gamma: float,
    outer_radius: Optional[float] = None,
):
    """
    Evaluate f(R, γ)(x) = Cγ ln‖x‖ − Cγ ln R + 1.

    Args:
        points: a single point (2,) or an array (..., 2)
        inner_radius: R
        gamma: γ
        outer_radius: precomputed C; solved for when omitted

    Returns:
        float for a single point, ndarray otherwise.

    Raises:
        AnalyticError: a point at the origin (logarithm singularity).
    """
    c = bernoulli_radius(inner_radius, gamma) if outer_radius is None else outer_radius
    pts = np.asarray(points, dtype=float)
    radius = np.linalg.norm(pts, axis=-1)
    if np.any(radius == 0.0):
        raise AnalyticError("potential undefined at the origin", inner_radius, gamma)
    value = c * gamma * np.log(radius) - c * gamma * np.log(inner_radius) + 1.0
    if np.ndim(value) == 0:
        return float(value)
    return value


def circle_levelset(points, radius: float):
    """R − ‖x‖: positive inside B(0, R), zero on its boundary."""
    pts = np.asarray(points, dtype=float)
    value = radius - np.linalg.norm(pts, axis=-1)
    if np.ndim(value) == 0:
        return float(value)
    return value


def annulus_state(
    nodes: np.ndarray,
    boundary: np.ndarray,
    solution: AnnulusSolution,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Discrete warm start on a reference mesh of the disk B(0, C).

    u takes the annulus potential (clipped to 1 inside ω and set to 0 on the
    boundary loop), the displacement is zero and the boundary multiplier is
    zero.

    Returns:
        (q_u, q_v, q_p) with shapes (n,), (2n,), (n_e,)
    """
    nodes = np.asarray(nodes, dtype=float)
    radius = np.linalg.norm(nodes, axis=1)
    safe = np.maximum(radius, solution.inner_radius)
    q_u = solution.outer_radius * solution.gamma * (np.log(safe) - np.log(solution.inner_radius)) + 1.0
    q_u = np.minimum(q_u, 1.0)
    q_u[np.asarray(boundary)] = 0.0
    q_v = np.zeros(2 * len(nodes))
    q_p = np.zeros(len(boundary))
    logger.debug(f"Annulus warm start: n={len(nodes)}, n_e={len(boundary)}, C={solution.outer_radius:.10f}")
    return q_u, q_v, q_p


def penalized_annulus(
    radii: np.ndarray,
    heaviside: np.ndarray,
    epsilon: float,
    gamma: float,
    rtol: float = 1e-11,
) -> AnnulusSolution:
    """
    Annulus solution of the penalized problem for a radial penalty profile.

    The inclusion enters the state equation as the penalty (1/ε)H(r)(u − 1).
    For a radial profile H, tabulated at increasing `radii` with H = 1 on a
    leading run and H = 0 on a trailing run, the regular solution is
    u = 1 + A·w with w'' + w'/r = (H/ε)w. Outside the profile w is
    logarithmic, so the penalized problem is the exact annulus problem with
    inner radius R_eff = r_out·exp(−w/(r_out w')) evaluated at r_out. The
    log-derivative y = w'/w is integrated across the profile
    (y' = H/ε − y/r − y²), starting from the Bessel ratio I₁/I₀ where H = 1.

    Returns:
        AnnulusSolution whose `inner_radius` is R_eff.

    Raises:
        AnalyticError: the table does not start at H = 1 and end at H = 0.
    """
    r = np.asarray(radii, dtype=float)
    h = np.asarray(heaviside, dtype=float)
    if r.shape != h.shape or r.ndim != 1 or r.size < 3:
        raise AnalyticError("penalty profile needs matching 1-D radius and value tables", gamma=gamma)
    if np.any(np.diff(r) <= 0.0) or r[0] <= 0.0:
        raise AnalyticError("profile radii must be positive and increasing", gamma=gamma)
    if not epsilon > 0:
        raise AnalyticError("penalty scale must be positive", gamma=gamma)

    full = np.flatnonzero(h < 1.0)
    empty = np.flatnonzero(h > 0.0)
    if full.size == 0 or full[0] == 0:
        raise AnalyticError("penalty profile must start inside the inclusion (H = 1)", gamma=gamma)
    if empty.size == 0 or empty[-1] == r.size - 1:
        raise AnalyticError("penalty profile must end outside the inclusion (H = 0)", gamma=gamma)
    inner, outer = r[full[0] - 1], r[empty[-1] + 1]

    root = np.sqrt(epsilon)
    x = inner / root
    start = special.ive(1, x) / special.ive(0, x) / root

    def riccati(s, y):
        return [np.interp(s, r, h) / epsilon - y[0] / s - y[0] * y[0]]

    sol = solve_ivp(
        riccati,
        (inner, outer),
        [start],
        method="DOP853",
        rtol=rtol,
        atol=1e-12,
        max_step=(outer - inner) / 200.0,
    )
    if not sol.success:
        raise AnalyticError(f"penalty profile integration failed: {sol.message}", gamma=gamma)
    y = float(sol.y[0, -1])
    effective = outer * np.exp(-1.0 / (outer * y))
    logger.debug(f"Penalized annulus: profile [{inner:.6f}, {outer:.6f}], effective inclusion radius {effective:.10f}")
    return AnnulusSolution.solve(float(effective), gamma)
