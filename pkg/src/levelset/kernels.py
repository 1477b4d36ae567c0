"""
JAX versions of the level set primitives.

These operate on per-element padded candidate lists: `knots` (K, 2),
`alpha` (K,), `mask` (K,) with masked entries contributing exactly zero.
They are traced inside the element kernels, so everything is written to
stay differentiable, including at points that coincide with a knot.
"""

import jax.numpy as jnp


def safe_norm(x, axis=-1):
    """Euclidean norm with a zero (not NaN) derivative at the origin."""
    sq = jnp.sum(x * x, axis=axis)
    positive = sq > 0.0
    return jnp.where(positive, jnp.sqrt(jnp.where(positive, sq, 1.0)), 0.0)


def levelset_and_gradient(points, knots, alpha, mask, support_radius):
    """
    ψ and ∇ψ at `points` (Q, 2) from the candidate knots.

    Returns:
        (values (Q,), gradients (Q, 2))
    """
    diff = points[:, None, :] - knots[None, :, :]
    r = safe_norm(diff) / support_radius
    inside = jnp.where(mask[None, :] & (r < 1.0), 1.0 - r, 0.0)
    inside3 = inside * inside * inside
    weights = alpha[None, :] * inside3 * inside * (4.0 * r + 1.0)
    slopes = alpha[None, :] * -20.0 * inside3 / (support_radius * support_radius)
    return jnp.sum(weights, axis=1), jnp.sum(slopes[:, :, None] * diff, axis=1)


def heaviside(y, beta):
    """C¹ smoothed Heaviside, matching `rbf.smoothed_heaviside`."""
    t = jnp.clip(y / beta, -1.0, 1.0)
    return 0.75 * (t - t * t * t / 3.0) + 0.5


def heaviside_at(points, knots, alpha, mask, support_radius, delta, floor, scale=1.0):
    """H_{scale·β}(ψ) with β = δ‖∇ψ‖ + floor, at `points` (Q, 2)."""
    psi, grad = levelset_and_gradient(points, knots, alpha, mask, support_radius)
    beta = scale * (delta * safe_norm(grad) + floor)
    return heaviside(psi, beta)
