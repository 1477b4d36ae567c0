import numpy as np
import pytest
import scipy.sparse as sp

from src.analytic import annulus_state, circle_levelset
from src.levelset import DesignVector, RbfGrid, fit_initial_alpha
from src.mesh import Mesh, mesh_polygon
from src.objective import TargetShape, TargetSpec
from src.sensitivity import (
    GradientCheckReport,
    GradientCheckRow,
    SensitivityError,
    ShapeProblem,
    design_gradient,
    design_jacobian,
    finite_difference_check,
    grad_q_objective,
    relative_error,
    select_components,
    solve_adjoint,
)
from src.sensitivity.types import AdjointVector
from src.state import NewtonSettings, StateAssembler, StateParams, StateVector

from .conftest import build_problem


def _mirrored_disk(radius, h):
    """Disk mesh symmetric about the x-axis: the upper half is meshed and reflected."""
    half_count = max(4, int(np.ceil(np.pi * radius / h)))
    theta = np.pi * np.arange(half_count + 1) / half_count
    arc = radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    arc[0], arc[-1] = (radius, 0.0), (-radius, 0.0)
    xs = np.linspace(-radius, radius, max(2, int(np.ceil(2.0 * radius / h))) + 1)[1:-1]
    half = mesh_polygon(np.vstack([arc, np.stack([xs, np.zeros_like(xs)], axis=1)]), h)

    nodes = half.nodes
    upper = np.flatnonzero(nodes[:, 1] != 0.0)
    mirror = np.arange(len(nodes))
    mirror[upper] = len(nodes) + np.arange(upper.size)
    reflected = nodes[upper] * np.array([1.0, -1.0])
    triangles = np.vstack([half.triangles, mirror[half.triangles][:, [0, 2, 1]]])
    boundary = np.concatenate([np.arange(half_count + 1), mirror[np.arange(half_count - 1, 0, -1)]])
    return Mesh(nodes=np.vstack([nodes, reflected]), triangles=triangles, boundary=boundary, h=h)


def _mirror_pairs(grid):
    """Index of the knot (x, −y) for every knot (x, y)."""
    knots = grid.knots
    flipped = knots * np.array([1.0, -1.0])
    distance = np.linalg.norm(knots[None, :, :] - flipped[:, None, :], axis=2)
    return np.argmin(distance, axis=1)


@pytest.fixture(scope="module")
def penalized_problem():
    return build_problem(eta=0.1)


def _row(component, error):
    return GradientCheckRow(
        component=component,
        adjoint=1.0,
        finite_difference=1.0,
        relative_error=error,
        newton_solves=2,
        newton_iterations=4,
    )


class TestAdjointSolve:
    def test_zero_rhs_gives_zero_adjoint(self):
        adjoint = solve_adjoint(sp.eye(4, format="csr"), np.zeros(4))
        assert np.array_equal(adjoint.nu, np.zeros(4))
        assert adjoint.relative_residual == 0.0

    def test_transposed_system(self, rng):
        matrix = sp.random(30, 30, density=0.2, random_state=7, format="csr") + 5.0 * sp.eye(30, format="csr")
        rhs = rng.normal(size=30)
        adjoint = solve_adjoint(matrix, rhs)
        assert np.allclose(matrix.T @ adjoint.nu, rhs, atol=1e-12)
        assert adjoint.relative_residual <= 1e-10

    def test_singular_jacobian(self):
        singular = sp.csr_matrix(np.array([[1.0, 0.0], [0.0, 0.0]]))
        with pytest.raises(SensitivityError):
            solve_adjoint(singular, np.ones(2))

    def test_gray_gradient_needs_design(self, coarse_problem):
        problem, _, state = coarse_problem
        with pytest.raises(SensitivityError):
            grad_q_objective(problem.assembler, state.stack(), problem.target, None, eta=0.1)


class TestObjectiveGradient:
    def test_tracking_touches_only_boundary_displacements(self, coarse_problem):
        problem, design, state = coarse_problem
        assembler = problem.assembler
        grad = grad_q_objective(assembler, state.stack(), problem.target, design)
        n = assembler.n
        assert not np.any(grad[:n])
        assert not np.any(grad[3 * n :])
        interior = np.setdiff1d(np.arange(n), assembler.mesh.boundary)
        v = grad[n : 3 * n].reshape(n, 2)
        assert not np.any(v[interior])
        assert np.any(v[assembler.mesh.boundary])

    def test_adjoint_gradient_matches_finite_differences(self, rng):
        problem, design, state = build_problem(h=0.2, eta=0.1)
        assert 400 <= problem.assembler.mesh.n_triangles <= 900
        evaluation = problem.evaluate(design, state)
        assert evaluation.gradient.shape == (design.flat.size,)
        assert evaluation.adjoint_residual <= 1e-10
        components = select_components(evaluation.gradient, 5, rng, include_zero=False)
        report = finite_difference_check(
            problem, design, evaluation.newton.state, evaluation.gradient, components, threshold=1e-4
        )
        assert len(report.rows) == 5
        assert all(row.newton_solves == 2 for row in report.rows)
        assert report.max_relative_error <= 1e-4
        assert report.passed

    def test_mirror_symmetric_design_has_mirrored_gradient(self, annulus, rng):
        mesh = _mirrored_disk(annulus.outer_radius, 0.3)
        grid = RbfGrid(n=5)
        pairs = _mirror_pairs(grid)
        fitted = fit_initial_alpha(grid, lambda p: circle_levelset(p, 1.0)).flat
        noise = 0.05 * rng.normal(size=grid.size)
        flat = 0.5 * (fitted + fitted[pairs]) + noise + noise[pairs]
        design = DesignVector(alpha=flat.reshape(grid.n, grid.n))
        assert np.array_equal(design.flat, design.flat[pairs])

        assembler = StateAssembler(mesh, grid, StateParams.build(-1.0, 0.3))
        target = TargetShape.from_spec(TargetSpec(kind="cosine_key"), -1.0)
        problem = ShapeProblem(assembler, target, eta=0.1, newton=NewtonSettings(tol=1e-12))
        u, v, p = annulus_state(mesh.nodes, mesh.boundary, annulus)
        gradient = problem.evaluate(design, StateVector(u=u, v=v, p=p)).gradient
        assert np.abs(gradient).max() > 0.0
        assert np.abs(gradient - gradient[pairs]).max() <= 1e-8 * np.abs(gradient).max()

    def test_gray_penalty_contributes_to_gradient(self, penalized_problem):
        problem, design, state = penalized_problem
        result = problem.solve_state(design, state)
        q = result.state.stack()
        assembler = problem.assembler
        adjoint = AdjointVector(nu=np.zeros(assembler.size))
        plain = design_gradient(assembler, q, adjoint, design, eta=0.0)
        penalized = design_gradient(assembler, q, adjoint, design, eta=problem.eta)
        assert not np.any(plain)
        assert np.any(penalized)


class TestUncoveredKnots:
    @pytest.fixture(scope="class")
    def wide(self, coarse_mesh):
        grid = RbfGrid(n=8, x_min=-8.0, x_max=8.0, y_min=-8.0, y_max=8.0)
        assembler = StateAssembler(coarse_mesh, grid, StateParams.build(-1.0, 0.3))
        design = DesignVector(alpha=np.random.default_rng(3).normal(size=(8, 8)))
        return grid, assembler, design

    def test_corner_knot_misses_the_mesh(self, wide, coarse_mesh):
        grid, _, _ = wide
        corner = grid.knots[grid.flat_index(7, 7)]
        distance = np.min(np.linalg.norm(coarse_mesh.nodes - corner, axis=1))
        assert distance > grid.support_radius

    def test_design_column_is_empty(self, wide, rng):
        grid, assembler, design = wide
        q = np.concatenate([rng.normal(size=assembler.n), np.zeros(2 * assembler.n), rng.normal(size=assembler.n_e)])
        jac = design_jacobian(assembler, q, design)
        columns = jac.matrix.tocsc()
        for corner in (grid.flat_index(0, 0), grid.flat_index(7, 7)):
            assert not np.any(columns[:, corner].toarray())
        assert jac.column_rows(grid.flat_index(3, 3)).size > 0
        assert np.any(columns[:, grid.flat_index(3, 3)].toarray())

        nu = AdjointVector(nu=rng.normal(size=assembler.size))
        gradient = design_gradient(assembler, q, nu, design, eta=0.1)
        assert gradient[grid.flat_index(7, 7)] == 0.0

    def test_residual_ignores_uncovered_coefficient(self, wide, rng):
        grid, assembler, design = wide
        q = np.concatenate([rng.normal(size=assembler.n), np.zeros(2 * assembler.n + assembler.n_e)])
        flat = design.flat.copy()
        flat[grid.flat_index(7, 7)] += 1.0
        before = assembler.residual(q, design).stack()
        after = assembler.residual(q, design.with_alpha(flat)).stack()
        assert np.array_equal(before, after)


class TestComponentSelection:
    def test_significant_components_plus_zero(self, rng):
        gradient = np.array([1.0, 0.5, 1e-5, 0.0, -0.2, 0.0])
        picked = select_components(gradient, 3, rng)
        assert len(picked) == 4
        assert set(picked[:3]) == {0, 1, 4}
        assert picked[3] in (3, 5)

    def test_without_zero(self, rng):
        picked = select_components(np.array([1.0, 0.0, 2.0]), 5, rng, include_zero=False)
        assert picked == [0, 2]

    def test_all_zero_gradient(self, rng):
        picked = select_components(np.zeros(4), 2, rng, include_zero=False)
        assert len(picked) == 2
        assert all(0 <= p < 4 for p in picked)


class TestReport:
    def test_relative_error(self):
        assert relative_error(0.0, 0.0) == 0.0
        assert relative_error(1.0, 0.99) == pytest.approx(0.01)
        assert relative_error(-1.0, 1.0) == pytest.approx(2.0)

    def test_passed_uses_threshold(self):
        assert GradientCheckReport(rows=[_row(0, 1e-6), _row(3, 5e-4)]).passed
        failing = GradientCheckReport(rows=[_row(0, 1e-6), _row(3, 5e-3)])
        assert not failing.passed
        assert failing.max_relative_error == 5e-3
        assert GradientCheckReport(rows=[]).passed
        assert _row(2, 0.1).row()[0] == 2
