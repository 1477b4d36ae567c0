import logging

import numpy as np
import pytest
import scipy.sparse as sp

from src.levelset import DesignVector
from src.mesh import InvertedElementError
from src.state import (
    NewtonConvergenceError,
    NewtonStepRejected,
    Residual,
    StateSolveError,
    StateVector,
    assemble_jacobian,
    assemble_residual,
    newton_solve,
    write_newton_log,
)

from .conftest import build_problem


def _perturbed_state(state, rng):
    """Annulus warm start moved off the solution so every block is active."""
    return np.concatenate(
        [
            state.u + 0.05 * rng.normal(size=state.n),
            0.01 * rng.normal(size=2 * state.n),
            0.1 * rng.normal(size=state.n_e),
        ]
    )


def _relative_gap(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(a), 1e-300)


def test_jacobian_matches_central_differences(coarse_problem, rng):
    problem, design, state = coarse_problem
    assembler = problem.assembler
    q = _perturbed_state(state, rng)
    h = assembler.nodal_heaviside(q, design)
    assert np.any((h > 0.0) & (h < 1.0)), "gray region must be active"

    _, jacobian = assembler.evaluate(q, design)
    eps = 1e-6
    for _ in range(20):
        d = rng.normal(size=assembler.size)
        d /= np.linalg.norm(d)
        fd = (assembler.residual(q + eps * d, design).stack() - assembler.residual(q - eps * d, design).stack()) / (2 * eps)
        assert _relative_gap(jacobian @ d, fd) <= 1e-6


def test_design_jacobian_matches_central_differences(coarse_problem, rng):
    problem, design, state = coarse_problem
    assembler = problem.assembler
    q = _perturbed_state(state, rng)
    jac = assembler.design_jacobian(q, design)
    assert jac.shape == (assembler.size, design.flat.size)
    eps = 1e-6
    for _ in range(5):
        d = rng.normal(size=design.flat.size)
        d /= np.linalg.norm(d)
        plus = assembler.residual(q, design.with_alpha(design.flat + eps * d)).stack()
        minus = assembler.residual(q, design.with_alpha(design.flat - eps * d)).stack()
        assert _relative_gap(jac @ d, (plus - minus) / (2 * eps)) <= 1e-6


def test_frozen_geometry_drops_displacement_columns(coarse_problem, rng):
    problem, design, state = coarse_problem
    assembler = problem.assembler
    q = _perturbed_state(state, rng)
    full = assemble_jacobian(assembler.mesh, state, design, assembler.grid, assembler.params).tocsr()
    frozen = assemble_jacobian(assembler.mesh, state, design, assembler.grid, assembler.params, frozen_geometry=True)
    n, n_e = assembler.n, assembler.n_e
    assert abs(frozen[: n + n_e, n : 3 * n]).max() == 0.0
    assert abs(full[: n + n_e, n : 3 * n]).max() > 0.0
    assert abs(full[n + n_e :] - frozen[n + n_e :]).max() == 0.0
    residual_full = assembler.residual(q, design).stack()
    assert np.allclose(
        residual_full,
        assemble_residual(assembler.mesh, StateVector.from_stacked(q, n, n_e), design, assembler.grid, assembler.params).stack(),
        rtol=1e-12,
        atol=1e-12,
    )


def test_frozen_potential_block_is_symmetric(coarse_problem, rng):
    problem, design, state = coarse_problem
    assembler = problem.assembler
    q = StateVector.from_stacked(_perturbed_state(state, rng), assembler.n, assembler.n_e)
    frozen = assemble_jacobian(assembler.mesh, q, design, assembler.grid, assembler.params, frozen_geometry=True)
    block = frozen.tocsr()[: assembler.n, : assembler.n]
    assert abs(block - block.T).max() <= 1e-12 * abs(block).max()
    assert np.all(block.diagonal() > 0.0)


def test_annulus_warm_start_balances_the_pseudo_solid(coarse_problem):
    problem, design, state = coarse_problem
    assembler = problem.assembler
    assert np.array_equal(state.p, np.zeros(assembler.n_e))
    assert np.all(assembler.residual(state.stack(), design).r3 == 0.0)
    shifted = StateVector(u=state.u, v=state.v, p=np.full(assembler.n_e, assembler.params.gamma))
    assert np.abs(assembler.residual(shifted.stack(), design).r3).max() > 0.0


def test_residual_blocks_for_constant_potential(coarse_problem):
    problem, design, _ = coarse_problem
    assembler = problem.assembler
    mesh = assembler.mesh
    q = np.concatenate([np.ones(assembler.n), np.zeros(2 * assembler.n), np.zeros(assembler.n_e)])
    residual = assembler.residual(q, design)
    pts = mesh.boundary_points
    perimeter = np.sum(np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1))
    gamma = assembler.params.gamma
    assert residual.r1.sum() == pytest.approx(-gamma * perimeter, rel=1e-12)
    assert residual.r2.sum() == pytest.approx(perimeter, rel=1e-12)
    assert np.all(residual.r3 == 0.0)


def test_traction_matrix_integrates_normal_to_zero(coarse_problem):
    assembler = coarse_problem[0].assembler
    total = (assembler.traction_matrix @ np.ones(assembler.n_e)).reshape(-1, 2).sum(axis=0)
    assert np.allclose(total, 0.0, atol=1e-12)
    moment = assembler.traction_matrix.T @ assembler.mesh.nodes.reshape(-1)
    assert abs(moment.sum()) == pytest.approx(2.0 * assembler.mesh.area(), rel=1e-12)


def test_newton_from_annulus_warm_start():
    problem, design, state = build_problem(h=0.2, n=8, delta=0.1)
    result = newton_solve(problem.assembler, state, design, tol=1e-10, max_iter=10)
    assert result.residual_norm <= 1e-10
    assert result.iterations <= 10
    norms = [max(row.r1, row.r2, row.r3) for row in result.history]
    assert len(norms) == result.iterations + 1
    if result.iterations >= 2:
        assert norms[-1] <= 1e-2 * norms[-2]


def test_newton_already_converged_takes_no_step(coarse_problem):
    problem, design, state = coarse_problem
    first = problem.solve_state(design, state)
    again = newton_solve(problem.assembler, first.state, design, tol=1e-10)
    assert again.iterations == 0
    assert np.array_equal(again.state.stack(), first.state.stack())


def test_newton_reports_nonconvergence(coarse_problem):
    problem, design, state = coarse_problem
    start = StateVector.zeros(state.n, state.n_e)
    with pytest.raises(NewtonConvergenceError) as info:
        newton_solve(problem.assembler, start, design, tol=1e-14, max_iter=1)
    assert info.value.iterations == 1
    assert len(info.value.history) == 2
    assert info.value.residual_norm > 1e-14


class _WrongSignAssembler:
    """r(q) = q with the Jacobian sign flipped, so every trial grows ‖r‖."""

    n, n_e = 1, 1

    def is_degenerate(self, design):
        return False

    def evaluate(self, q, design):
        return Residual(r1=q[:1], r2=q[1:2], r3=q[2:4]), -sp.identity(4, format="csr")


def test_newton_rejects_a_step_without_decrease():
    start = StateVector(u=[1.0], v=[1.0, 1.0], p=[1.0])
    with pytest.raises(NewtonStepRejected) as info:
        newton_solve(_WrongSignAssembler(), start, DesignVector.zeros(2), max_halvings=8)
    assert isinstance(info.value, StateSolveError)
    assert info.value.iteration == 1
    assert info.value.halvings == 8
    assert len(info.value.history) == 1
    assert info.value.residual_norm == 1.0


def test_newton_rejects_inverted_initial_state(coarse_problem):
    problem, design, state = coarse_problem
    nodes = problem.assembler.mesh.nodes
    flipped = StateVector(u=state.u, v=(-2.0 * nodes * np.array([1.0, 0.0])).ravel(), p=state.p)
    with pytest.raises(InvertedElementError):
        newton_solve(problem.assembler, flipped, design)


def test_degenerate_design_is_flagged(coarse_problem, caplog):
    problem, design, state = coarse_problem
    zero = DesignVector.zeros(design.n)
    assert problem.assembler.is_degenerate(zero)
    assert not problem.assembler.is_degenerate(design)
    with caplog.at_level(logging.WARNING):
        try:
            newton_solve(problem.assembler, state, zero, max_iter=2)
        except (StateSolveError, InvertedElementError):
            pass
    assert "DEGENERATE" in caplog.text


def test_state_vector_layout():
    state = StateVector(u=[1.0, 2.0], v=[0.1, 0.2, 0.3, 0.4], p=[5.0])
    assert state.n == 2 and state.n_e == 1
    assert state.stack().tolist() == [1.0, 2.0, 0.1, 0.2, 0.3, 0.4, 5.0]
    assert state.displacement.tolist() == [[0.1, 0.2], [0.3, 0.4]]
    assert np.array_equal(StateVector.from_stacked(state.stack(), 2, 1).stack(), state.stack())
    with pytest.raises(StateSolveError):
        StateVector.from_stacked(np.zeros(6), 2, 1)
    with pytest.raises(ValueError):
        StateVector(u=[1.0], v=[0.1, 0.2, 0.3], p=[0.0])


def test_newton_log_csv(tmp_path, coarse_problem):
    problem, design, state = coarse_problem
    result = problem.solve_state(design, state)
    path = write_newton_log(tmp_path / "newton.csv", result.history)
    lines = path.read_text().splitlines()
    assert lines[0] == "iter,r1,r2,r3,halvings"
    assert len(lines) == len(result.history) + 1
