"""
State Assembly
==============

Assembly of the residual r(q) = (r1, r2, r3), its Jacobian ∂r/∂q and the
design Jacobian ∂r/∂α from the element kernels. Elements are processed in
mesh order and scattered with fixed-order sums, so identical inputs give
bitwise identical results.
"""

import logging
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp

from ..levelset import DesignVector, RbfGrid, heaviside_field
from ..mesh import InvertedElementError, Mesh
from . import kernels
from .types import Residual, StateParams, StateVector

logger = logging.getLogger(__name__)

CANDIDATE_BUCKET = 32


class CandidateLists:
    """
    Padded per-element lists of knots whose support may reach the element.

    Built from element centroids and circumradii; valid for any later
    configuration whose centroids moved (plus radius growth) by at most
    `margin`.
    """

    def __init__(self, grid: RbfGrid, element_points: np.ndarray, margin: float):
        self.margin = margin
        self.centroids = element_points.mean(axis=1)
        self.radii = np.max(np.linalg.norm(element_points - self.centroids[:, None, :], axis=2), axis=1)
        reach = grid.support_radius + margin
        lists = [grid.quadtree.query_radius(c, reach + rho) for c, rho in zip(self.centroids, self.radii)]
        longest = max((len(c) for c in lists), default=0)
        width = CANDIDATE_BUCKET * max(1, -(-longest // CANDIDATE_BUCKET))
        self.indices = np.zeros((len(lists), width), dtype=np.int64)
        self.mask = np.zeros((len(lists), width), dtype=bool)
        for e, c in enumerate(lists):
            self.indices[e, : len(c)] = c
            self.mask[e, : len(c)] = True
        self.knots = grid.knots[self.indices]
        self.longest = longest

    def covers(self, element_points: np.ndarray) -> bool:
        centroids = element_points.mean(axis=1)
        radii = np.max(np.linalg.norm(element_points - centroids[:, None, :], axis=2), axis=1)
        drift = np.linalg.norm(centroids - self.centroids, axis=1) + np.maximum(0.0, radii - self.radii)
        return bool(np.all(drift <= self.margin))

    def alpha(self, design: DesignVector) -> np.ndarray:
        return np.where(self.mask, design.flat[self.indices], 0.0)


class StateAssembler:
    """
    Residual and Jacobian assembly on a fixed reference mesh.

    Args:
        mesh: reference triangulation T̂
        grid: RBF knot grid of the design
        params: γ, smoothing (ε, δ) and Lamé coefficients
        frozen_geometry: drop the q_v columns of r1 and r2 from the
            Jacobian (debug mode; the residual is unchanged)
        margin: knot candidate slack as a fraction of r_s
        logger: optional logger
    """

    def __init__(
        self,
        mesh: Mesh,
        grid: RbfGrid,
        params: StateParams,
        frozen_geometry: bool = False,
        margin: float = 0.1,
        logger: Optional[logging.Logger] = None,
    ):
        self.mesh = mesh
        self.grid = grid
        self.params = params
        self.frozen_geometry = frozen_geometry
        self.logger = logger or logging.getLogger(__name__)

        self.n = mesh.n_nodes
        self.n_e = mesh.n_boundary
        self.size = 3 * self.n + self.n_e
        self._margin = margin * grid.support_radius

        self._tri = np.asarray(mesh.triangles)
        self._x_ref = mesh.nodes[self._tri]
        self._edge_nodes = mesh.boundary_edges
        self._edge_pos = np.stack([np.arange(self.n_e), (np.arange(self.n_e) + 1) % self.n_e], axis=1)
        self._x_ref_edges = mesh.nodes[self._edge_nodes]
        self._traction = self._traction_matrix()

        self._reference = CandidateLists(grid, self._x_ref, 0.0)
        self._deformed: Optional[CandidateLists] = None
        self._index_cache()

    # ------------------------------------------------------------------
    # Index bookkeeping
    # ------------------------------------------------------------------

    def _index_cache(self) -> None:
        n, n_e, tri = self.n, self.n_e, self._tri
        dof_v = n + 2 * tri[:, :, None] + np.arange(2)
        self._rows_r1 = tri
        self._rows_r3 = n + n_e + 2 * tri[:, :, None] + np.arange(2)
        self._cols_u = tri
        self._cols_v = dof_v
        edge_v = n + 2 * self._edge_nodes[:, :, None] + np.arange(2)
        self._edge_cols_v = edge_v
        self._edge_rows_r2 = n + self._edge_pos

    def _traction_matrix(self) -> sp.csr_matrix:
        """Constant map p ↦ ∫_{∂Ω̂} p n̂·w ds into the r3 rows (2n × n_e)."""
        d = self._x_ref_edges[:, 1] - self._x_ref_edges[:, 0]
        normal = np.stack([d[:, 1], -d[:, 0]], axis=1)
        rows, cols, vals = [], [], []
        for (a, b), (ka, kb), ln in zip(self._edge_nodes, self._edge_pos, normal):
            for node, near, far in ((a, ka, kb), (b, kb, ka)):
                for comp in range(2):
                    rows += [2 * node + comp, 2 * node + comp]
                    cols += [near, far]
                    vals += [2.0 * ln[comp] / 6.0, ln[comp] / 6.0]
        return sp.csr_matrix((vals, (rows, cols)), shape=(2 * self.n, self.n_e))

    @property
    def traction_matrix(self) -> sp.csr_matrix:
        return self._traction

    # ------------------------------------------------------------------
    # Geometry
    # ------------------------------------------------------------------

    def deformed_mesh(self, q: np.ndarray, check: bool = True) -> Mesh:
        v = np.asarray(q[self.n : 3 * self.n]).reshape(self.n, 2)
        deformed = self.mesh.with_nodes(self.mesh.nodes + v)
        if check:
            bad = deformed.inverted_elements()
            if bad.size:
                raise InvertedElementError(bad[0], deformed.signed_areas()[bad[0]])
        return deformed

    def _element_state(self, q: np.ndarray):
        q = np.asarray(q, dtype=float)
        if q.shape != (self.size,):
            raise ValueError(f"state has shape {q.shape}, expected ({self.size},)")
        u = q[: self.n]
        v = q[self.n : 3 * self.n].reshape(self.n, 2)
        u_el = u[self._tri]
        v_el = v[self._tri]
        x_def = self._x_ref + v_el
        e1 = x_def[:, 1] - x_def[:, 0]
        e2 = x_def[:, 2] - x_def[:, 0]
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        bad = np.flatnonzero(det <= 0.0)
        if bad.size:
            raise InvertedElementError(bad[0], 0.5 * det[bad[0]])
        return u, v, u_el, v_el, x_def

    def deformed_candidates(self, x_def: np.ndarray) -> CandidateLists:
        if self._deformed is None or not self._deformed.covers(x_def):
            self._deformed = CandidateLists(self.grid, x_def, self._margin)
            self.logger.debug(f"Rebuilt deformed knot candidates (width {self._deformed.indices.shape[1]})")
        return self._deformed

    def consts(self) -> np.ndarray:
        s, e = self.params.smoothing, self.params.elasticity
        return np.array([s.epsilon, s.delta, s.floor, self.grid.support_radius, e.mu, e.lam, self.params.gamma])

    def is_degenerate(self, design: DesignVector) -> bool:
        """ψ ≡ 0: H_β = 1/2 everywhere, no inclusion boundary."""
        return not np.any(design.flat)

    # ------------------------------------------------------------------
    # Residual and Jacobians
    # ------------------------------------------------------------------

    def residual(self, q: np.ndarray, design: DesignVector) -> Residual:
        """r(q) for a stacked state q."""
        u, v, u_el, v_el, x_def = self._element_state(q)
        c = self.consts()
        deformed = self.deformed_candidates(x_def)
        r1_el = np.asarray(
            kernels.potential_values(u_el, v_el, deformed.alpha(design), self._x_ref, deformed.knots, deformed.mask, c)
        )
        r3_el = np.asarray(
            kernels.elastic_values(
                v_el, self._reference.alpha(design), self._x_ref, self._reference.knots, self._reference.mask, c
            )
        )
        flux, trace = kernels.edge_values(u[self._edge_nodes], v[self._edge_nodes], self._x_ref_edges, c)
        return self._scatter_residual(q, r1_el, r3_el, np.asarray(flux), np.asarray(trace))

    def _scatter_residual(self, q, r1_el, r3_el, flux, trace) -> Residual:
        n, n_e = self.n, self.n_e
        r1 = np.bincount(self._tri.ravel(), weights=r1_el.ravel(), minlength=n)
        r1 += np.bincount(self._edge_nodes.ravel(), weights=flux.ravel(), minlength=n)
        r2 = np.bincount(self._edge_pos.ravel(), weights=trace.ravel(), minlength=n_e)
        r3 = np.bincount((self._rows_r3 - n - n_e).ravel(), weights=r3_el.ravel(), minlength=2 * n)
        r3 -= self._traction @ q[3 * n :]
        return Residual(r1=r1, r2=r2, r3=r3)

    def evaluate(self, q: np.ndarray, design: DesignVector) -> Tuple[Residual, sp.csr_matrix]:
        """
        Residual and Jacobian ∂r/∂q in one pass.

        Raises:
            InvertedElementError: deformed mesh has a triangle with area ≤ 0.
        """
        u, v, u_el, v_el, x_def = self._element_state(q)
        c = self.consts()
        deformed = self.deformed_candidates(x_def)
        n, n_e, tri = self.n, self.n_e, self._tri
        n_t = len(tri)

        (j1_u, j1_v), r1_el = kernels.potential_jacobian(
            u_el, v_el, deformed.alpha(design), self._x_ref, deformed.knots, deformed.mask, c
        )
        j3_v, r3_el = kernels.elastic_jacobian(
            v_el, self._reference.alpha(design), self._x_ref, self._reference.knots, self._reference.mask, c
        )
        ((jf_u, jf_v), (jt_u, jt_v)), (flux, trace) = kernels.edge_jacobian(
            u[self._edge_nodes], v[self._edge_nodes], self._x_ref_edges, c
        )
        residual = self._scatter_residual(
            q, np.asarray(r1_el), np.asarray(r3_el), np.asarray(flux), np.asarray(trace)
        )

        rows, cols, vals = [], [], []

        def add(r, cc, vv):
            rows.append(np.broadcast_to(r, vv.shape).ravel())
            cols.append(np.broadcast_to(cc, vv.shape).ravel())
            vals.append(np.asarray(vv).ravel())

        # r1 / q_u
        add(self._rows_r1[:, :, None], self._cols_u[:, None, :], np.asarray(j1_u))
        # r2 / q_u
        add(self._edge_rows_r2[:, :, None], self._edge_nodes[:, None, :], np.asarray(jt_u))
        if not self.frozen_geometry:
            # r1 / q_v, domain and boundary flux
            add(self._rows_r1[:, :, None, None], self._cols_v[:, None, :, :], np.asarray(j1_v))
            add(self._edge_nodes[:, :, None, None], self._edge_cols_v[:, None, :, :], np.asarray(jf_v))
            # r2 / q_v
            add(self._edge_rows_r2[:, :, None, None], self._edge_cols_v[:, None, :, :], np.asarray(jt_v))
        # r3 / q_v
        add(
            self._rows_r3[:, :, :, None, None],
            self._cols_v[:, None, None, :, :],
            np.asarray(j3_v).reshape(n_t, 3, 2, 3, 2),
        )
        # r3 / q_p
        traction = self._traction.tocoo()
        add(n + n_e + traction.row, 3 * n + traction.col, -traction.data)

        jacobian = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.size, self.size),
        )
        return residual, jacobian

    def design_jacobian(self, q: np.ndarray, design: DesignVector) -> sp.csr_matrix:
        """∂r/∂α, shape (3n + n_e) × N², columns restricted to covering knots."""
        u, v, u_el, v_el, x_def = self._element_state(q)
        c = self.consts()
        deformed = self.deformed_candidates(x_def)
        ref = self._reference

        j1 = np.asarray(
            kernels.potential_design_jacobian(u_el, v_el, deformed.alpha(design), self._x_ref, deformed.knots, deformed.mask, c)
        )
        j3 = np.asarray(kernels.elastic_design_jacobian(v_el, ref.alpha(design), self._x_ref, ref.knots, ref.mask, c))

        rows1 = np.broadcast_to(self._rows_r1[:, :, None], j1.shape)
        cols1 = np.broadcast_to(deformed.indices[:, None, :], j1.shape)
        keep1 = np.broadcast_to(deformed.mask[:, None, :], j1.shape)
        rows3 = np.broadcast_to(self._rows_r3[:, :, :, None], j3.shape)
        cols3 = np.broadcast_to(ref.indices[:, None, None, :], j3.shape)
        keep3 = np.broadcast_to(ref.mask[:, None, None, :], j3.shape)

        rows = np.concatenate([rows1[keep1], rows3[keep3]])
        cols = np.concatenate([cols1[keep1], cols3[keep3]])
        vals = np.concatenate([j1[keep1], j3[keep3]])
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.size, self.grid.size))

    def gray_penalty(self, q: np.ndarray, design: DesignVector, eta: float, gradients: bool = False):
        """
        η∫ H_{2β}(ψ)(u − 1)² dx on the deformed mesh.

        Returns:
            value, or (value, ∂/∂q (size,), ∂/∂α (N²,)) when `gradients`.
        """
        u, v, u_el, v_el, x_def = self._element_state(q)
        c = self.consts()
        deformed = self.deformed_candidates(x_def)
        values, (g_u, g_v, g_a) = kernels.gray_values_and_grads(
            u_el, v_el, deformed.alpha(design), self._x_ref, deformed.knots, deformed.mask, c
        )
        value = eta * float(np.sum(np.asarray(values)))
        if not gradients:
            return value
        grad_q = np.zeros(self.size)
        grad_q[: self.n] = eta * np.bincount(self._tri.ravel(), weights=np.asarray(g_u).ravel(), minlength=self.n)
        grad_q[self.n : 3 * self.n] = eta * np.bincount(
            (self._cols_v - self.n).ravel(), weights=np.asarray(g_v).ravel(), minlength=2 * self.n
        )
        g_a = np.asarray(g_a)
        grad_alpha = eta * np.bincount(
            deformed.indices[deformed.mask], weights=g_a[deformed.mask], minlength=self.grid.size
        )
        return value, grad_q, grad_alpha

    def nodal_heaviside(self, q: np.ndarray, design: DesignVector, deformed: bool = True, scale: float = 1.0) -> np.ndarray:
        """H_{scale·β}(ψ) at the nodes, deformed or reference positions."""
        nodes = self.mesh.nodes
        if deformed:
            nodes = nodes + np.asarray(q[self.n : 3 * self.n]).reshape(self.n, 2)
        return heaviside_field(self.grid, design, nodes, self.params.smoothing, scale=scale)


def assemble_residual(mesh: Mesh, state: StateVector, design: DesignVector, grid: RbfGrid, params: StateParams) -> Residual:
    """One-shot residual assembly."""
    return StateAssembler(mesh, grid, params).residual(state.stack(), design)


def assemble_jacobian(
    mesh: Mesh,
    state: StateVector,
    design: DesignVector,
    grid: RbfGrid,
    params: StateParams,
    frozen_geometry: bool = False,
) -> sp.csr_matrix:
    """One-shot Jacobian assembly."""
    assembler = StateAssembler(mesh, grid, params, frozen_geometry=frozen_geometry)
    return assembler.evaluate(state.stack(), design)[1]
