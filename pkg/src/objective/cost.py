"""
Shape Objective
===============

Polar radius function of the free boundary, the squared-L² tracking cost
against a target radius and the gray-region penalty.
"""

import logging
from typing import Sequence, Tuple

import jax
import jax.numpy as jnp
import numpy as np

from ..mesh import Mesh
from .base import TargetShape
from .types import GrayRegionReport, NonStarLikeError, RadiusSamples

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 512
SAMPLES_PER_NODE = 4
TWO_PI = 2.0 * np.pi


def sample_count(requested: int, boundary_nodes: int) -> int:
    """M for a boundary of `boundary_nodes` nodes: at least 4 samples per node."""
    count = max(int(requested), SAMPLES_PER_NODE * int(boundary_nodes))
    if count > requested:
        logger.debug(f"Polar samples raised from {requested} to {count} for {boundary_nodes} boundary nodes")
    return count


def sample_angles(count: int = DEFAULT_SAMPLES) -> np.ndarray:
    """Uniform angles 2π(m + 1/2)/M, m = 0..M−1."""
    return TWO_PI * (np.arange(count) + 0.5) / count


class PolarBrackets:
    """
    Fixed interpolation brackets of the sample angles between boundary nodes.

    Built from the boundary positions at hand; the radius function built on
    them is differentiable in the node positions as long as the node order
    around the center does not change.
    """

    def __init__(self, points: np.ndarray, count: int = DEFAULT_SAMPLES, center: Sequence[float] = (0.0, 0.0)):
        rel = np.asarray(points, dtype=float) - np.asarray(center, dtype=float)
        n = len(rel)
        if np.any(np.hypot(rel[:, 0], rel[:, 1]) == 0.0):
            raise NonStarLikeError("boundary passes through the center")
        theta = np.arctan2(rel[:, 1], rel[:, 0])
        steps = np.mod(np.diff(np.append(theta, theta[0])) + np.pi, TWO_PI) - np.pi
        turning = float(np.sum(steps))
        if not np.isclose(abs(turning), TWO_PI, atol=1e-6):
            raise NonStarLikeError(f"boundary winds {turning / TWO_PI:.3f} times around the center")
        sign = np.sign(turning)
        bad = np.flatnonzero(sign * steps <= 0.0)
        if bad.size:
            raise NonStarLikeError("polar angle is not monotone along the boundary", int(bad[0]))

        self.center = np.asarray(center, dtype=float)
        self.reference = np.mod(theta, TWO_PI)
        self.directions = np.stack([np.cos(self.reference), np.sin(self.reference)], axis=1)
        order = np.argsort(self.reference)
        sorted_angles = self.reference[order]
        self.thetas = sample_angles(count)
        pos = np.searchsorted(sorted_angles, self.thetas, side="right") - 1
        self.lower = order[np.mod(pos, n)]
        self.upper = order[np.mod(pos + 1, n)]
        self.lower_shift = np.where(pos < 0, -TWO_PI, 0.0)
        self.upper_shift = np.where(pos + 1 >= n, TWO_PI, 0.0)

    def radii(self, points):
        """Radius function at the sample angles (jax-traceable in `points`)."""
        rel = points - self.center
        r = jnp.sqrt(jnp.sum(rel * rel, axis=1))
        cross = self.directions[:, 0] * rel[:, 1] - self.directions[:, 1] * rel[:, 0]
        dot = jnp.sum(self.directions * rel, axis=1)
        angle = self.reference + jnp.arctan2(cross, dot)
        lo = angle[self.lower] + self.lower_shift
        hi = angle[self.upper] + self.upper_shift
        t = (self.thetas - lo) / (hi - lo)
        return r[self.lower] + t * (r[self.upper] - r[self.lower])


def boundary_radius(mesh: Mesh, count: int = DEFAULT_SAMPLES, center: Sequence[float] = (0.0, 0.0)) -> RadiusSamples:
    """
    Polar radius g(θ) of the outer boundary at M uniform angles.

    Raises:
        NonStarLikeError: a ray from the center crosses the boundary twice.
    """
    points = mesh.boundary_points
    brackets = PolarBrackets(points, count, center)
    return RadiusSamples(thetas=brackets.thetas, values=np.asarray(brackets.radii(points)))


def tracking_cost(samples: RadiusSamples, target: TargetShape) -> float:
    """Trapezoid rule for ∫₀^{2π} (g(θ) − g_t(θ))² dθ on the periodic grid."""
    diff = samples.values - target.samples(samples.thetas)
    return float(TWO_PI / samples.count * np.sum(diff * diff))


def tracking_cost_and_gradient(
    points: np.ndarray,
    target: TargetShape,
    count: int = DEFAULT_SAMPLES,
    center: Sequence[float] = (0.0, 0.0),
) -> Tuple[float, np.ndarray]:
    """Tracking cost of a boundary polygon and its gradient w.r.t. the (n_e, 2) node positions."""
    brackets = PolarBrackets(points, count, center)
    goal = jnp.asarray(target.samples(brackets.thetas))

    def cost(p):
        diff = brackets.radii(p) - goal
        return TWO_PI / count * jnp.sum(diff * diff)

    value, grad = jax.value_and_grad(cost)(jnp.asarray(points, dtype=float))
    return float(value), np.asarray(grad)


def gray_penalty(assembler, q: np.ndarray, design, eta: float) -> float:
    """η∫_Ω H_{2β}(ψ)(u − 1)² dx on the deformed mesh."""
    if eta == 0.0:
        return 0.0
    return assembler.gray_penalty(q, design, eta)


def gray_region_report(assembler, q: np.ndarray, design) -> GrayRegionReport:
    """Extreme values of u at the nodes where 0 < H_β(ψ) < 1."""
    h = assembler.nodal_heaviside(q, design)
    u = np.asarray(q[: assembler.n])
    gray = (h > 0.0) & (h < 1.0)
    if not np.any(gray):
        return GrayRegionReport(nodes=0, fraction=0.0)
    return GrayRegionReport(
        nodes=int(gray.sum()),
        fraction=float(gray.mean()),
        u_min=float(u[gray].min()),
        u_max=float(u[gray].max()),
        max_deviation=float(np.max(np.abs(u[gray] - 1.0))),
    )
