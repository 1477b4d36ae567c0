"""
Element Kernels
===============

Element-level residual contributions written in jax.numpy. Element
Jacobians come from forward-mode differentiation of these functions, so the
assembled derivatives are exact, including the dependence of H_β(ψ(x)) on
the moving quadrature points and of β on ∇ψ.

Per-element arguments:
    u (3,), v (3, 2), x_ref (3, 2), alpha / knots / mask (K,) padded knot
    candidates. `consts` = [ε, δ, floor, r_s, μ, λ, γ].
"""

import jax
import jax.numpy as jnp
import numpy as np

from ..levelset.kernels import heaviside_at, safe_norm

# B[q, a] = λ_a at quadrature point q (3-point Gauss, weights 1/3).
# Host arrays: importing this module must not start a JAX backend.
BARY = np.array(
    [
        [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
        [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
        [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
    ]
)
WEIGHTS = np.full(3, 1.0 / 3.0)

EPS, DELTA, FLOOR, RS, MU, LAM, GAMMA = range(7)


def p1_geometry(x):
    """Area and barycentric gradients (3, 2) of a triangle."""
    det = (x[1, 0] - x[0, 0]) * (x[2, 1] - x[0, 1]) - (x[1, 1] - x[0, 1]) * (x[2, 0] - x[0, 0])
    grads = jnp.stack(
        [
            jnp.stack([x[1, 1] - x[2, 1], x[2, 0] - x[1, 0]]),
            jnp.stack([x[2, 1] - x[0, 1], x[0, 0] - x[2, 0]]),
            jnp.stack([x[0, 1] - x[1, 1], x[1, 0] - x[0, 0]]),
        ]
    ) / det
    return 0.5 * det, grads


def potential_element(u, v, alpha, x_ref, knots, mask, consts):
    """r1 on the deformed triangle: stiffness plus (1/ε)H_β(ψ)(u − 1) penalty."""
    x = x_ref + v
    area, grads = p1_geometry(x)
    stiffness = area * (grads @ (grads.T @ u))
    xq = BARY @ x
    h = heaviside_at(xq, knots, alpha, mask, consts[RS], consts[DELTA], consts[FLOOR])
    uq = BARY @ u
    penalty = (area / consts[EPS]) * (BARY.T @ (WEIGHTS * h * (uq - 1.0)))
    return stiffness + penalty


def elastic_element(v, alpha, x_ref, knots, mask, consts):
    """r3 on the reference triangle: σ(v):ε(w) plus (1/ε)H_β(ψ) v·w."""
    area, grads = p1_geometry(x_ref)
    gradient = v.T @ grads
    strain = 0.5 * (gradient + gradient.T)
    stress = 2.0 * consts[MU] * strain + consts[LAM] * jnp.trace(strain) * jnp.eye(2)
    elastic = area * (grads @ stress)
    xq = BARY @ x_ref
    h = heaviside_at(xq, knots, alpha, mask, consts[RS], consts[DELTA], consts[FLOOR])
    vq = BARY @ v
    penalty = (area / consts[EPS]) * (BARY.T @ ((WEIGHTS * h)[:, None] * vq))
    return elastic + penalty


def boundary_edge(u, v, x_ref, consts):
    """
    Boundary edge terms on the deformed edge.

    Returns:
        (flux (2,), trace (2,)): −γ∫φ ds into r1 and ∫u μ ds into r2.
    """
    x = x_ref + v
    length = safe_norm(x[1] - x[0])
    flux = -consts[GAMMA] * 0.5 * length * jnp.ones(2)
    trace = (length / 6.0) * jnp.stack([2.0 * u[0] + u[1], u[0] + 2.0 * u[1]])
    return flux, trace


def gray_element(u, v, alpha, x_ref, knots, mask, consts):
    """∫_T H_{2β}(ψ)(u − 1)² on the deformed triangle (without η)."""
    x = x_ref + v
    area, _ = p1_geometry(x)
    xq = BARY @ x
    h2 = heaviside_at(xq, knots, alpha, mask, consts[RS], consts[DELTA], consts[FLOOR], scale=2.0)
    uq = BARY @ u
    return area * jnp.sum(WEIGHTS * h2 * (uq - 1.0) ** 2)


def _with_value(fun):
    def wrapped(*args):
        out = fun(*args)
        return out, out

    return wrapped


_ELEMENT = (0, 0, 0, 0, 0, 0, None)

potential_values = jax.jit(jax.vmap(potential_element, in_axes=_ELEMENT))
potential_jacobian = jax.jit(
    jax.vmap(jax.jacfwd(_with_value(potential_element), argnums=(0, 1), has_aux=True), in_axes=_ELEMENT)
)
potential_design_jacobian = jax.jit(jax.vmap(jax.jacfwd(potential_element, argnums=2), in_axes=_ELEMENT))

_ELASTIC = (0, 0, 0, 0, 0, None)

elastic_values = jax.jit(jax.vmap(elastic_element, in_axes=_ELASTIC))
elastic_jacobian = jax.jit(
    jax.vmap(jax.jacfwd(_with_value(elastic_element), argnums=0, has_aux=True), in_axes=_ELASTIC)
)
elastic_design_jacobian = jax.jit(jax.vmap(jax.jacfwd(elastic_element, argnums=1), in_axes=_ELASTIC))

_EDGE = (0, 0, 0, None)

edge_values = jax.jit(jax.vmap(boundary_edge, in_axes=_EDGE))
edge_jacobian = jax.jit(jax.vmap(jax.jacfwd(_with_value(boundary_edge), argnums=(0, 1), has_aux=True), in_axes=_EDGE))

gray_values_and_grads = jax.jit(
    jax.vmap(jax.value_and_grad(gray_element, argnums=(0, 1, 2)), in_axes=_ELEMENT)
)
