import numpy as np
import pytest

from src.analytic import bernoulli_radius
from src.levelset import DesignVector
from src.objective import (
    CircleTarget,
    CosineKeyTarget,
    NonStarLikeError,
    ObjectiveError,
    PolarBrackets,
    RadiusSamples,
    RoundedSquareTarget,
    TargetShape,
    TargetSpec,
    UserTableTarget,
    boundary_radius,
    gray_penalty,
    gray_region_report,
    sample_angles,
    sample_count,
    tracking_cost,
    tracking_cost_and_gradient,
)


def _polygon(radii, thetas):
    return np.stack([radii * np.cos(thetas), radii * np.sin(thetas)], axis=1)


class TestTargets:
    def test_rounded_square_flat_side_and_corner(self):
        target = RoundedSquareTarget(side=4.0, corner_radius=1.0)
        assert target.radius(0.0) == pytest.approx(2.0)
        assert target.radius(np.pi / 2) == pytest.approx(2.0)
        assert target.radius(np.pi / 4) == pytest.approx(np.sqrt(2.0) + 1.0)
        assert target.radius(3 * np.pi / 4) == pytest.approx(np.sqrt(2.0) + 1.0)

    def test_rounded_square_is_continuous_at_the_arc_junction(self):
        target = RoundedSquareTarget(side=4.0, corner_radius=1.0)
        switch = np.arctan(0.5)
        left, right = target.radius(switch - 1e-9), target.radius(switch + 1e-9)
        assert left == pytest.approx(np.sqrt(5.0), rel=1e-7)
        assert right == pytest.approx(np.sqrt(5.0), rel=1e-7)

    def test_sharp_square_corner(self):
        target = RoundedSquareTarget(side=2.0, corner_radius=0.0)
        assert target.radius(np.pi / 4) == pytest.approx(np.sqrt(2.0))

    def test_cosine_key_values(self):
        target = CosineKeyTarget(0.5, 0.8, 2.0)
        assert target.radius(0.0) == pytest.approx(3.3)
        assert target.radius(np.pi) == pytest.approx(2.3)
        assert target.radius(np.pi / 2) == pytest.approx(1.2)

    def test_cosine_key_must_stay_positive(self):
        with pytest.raises(ObjectiveError):
            CosineKeyTarget(1.0, 1.0, 1.5)
        with pytest.raises(ValueError):
            TargetSpec(kind="cosine_key", coefficients=(1.0, 1.0, 1.5))

    def test_circle_default_radius_follows_gamma(self):
        target = TargetShape.from_spec(TargetSpec(kind="circle"), gamma=-2.0)
        assert isinstance(target, CircleTarget)
        assert target.value == pytest.approx(bernoulli_radius(1.0, -2.0))

    def test_user_table_interpolates_periodically(self, tmp_path):
        path = tmp_path / "target.csv"
        path.write_text("theta,radius\n0.0,1.0\n2.0,2.0\n4.0,3.0\n")
        spec = TargetSpec(kind="user_table", table=str(path))
        target = TargetShape.from_spec(spec)
        assert isinstance(target, UserTableTarget)
        assert target.radius(1.0) == pytest.approx(1.5)
        wrap = 2 * np.pi - 4.0
        assert target.radius(4.0 + wrap / 2) == pytest.approx(2.0)
        assert target.radius(2.0 + 2 * np.pi) == pytest.approx(2.0)

    def test_user_table_errors(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("theta,radius\n")
        with pytest.raises(ObjectiveError):
            UserTableTarget.from_csv(empty)
        bad = tmp_path / "bad.csv"
        bad.write_text("0.0,1.0\n1.0,oops\n")
        with pytest.raises(ObjectiveError):
            UserTableTarget.from_csv(bad)
        with pytest.raises(ObjectiveError):
            UserTableTarget([0.0, 1.0, 2.0], [1.0, -1.0, 1.0])
        with pytest.raises(ValueError):
            TargetSpec(kind="user_table")

    def test_curve_is_closed_polyline(self):
        curve = CircleTarget(1.5).curve(64)
        assert curve.shape == (64, 2)
        assert np.allclose(np.hypot(curve[:, 0], curve[:, 1]), 1.5)


class TestRadiusFunction:
    def test_sample_angles_are_half_offset(self):
        thetas = sample_angles(8)
        assert thetas[0] == pytest.approx(np.pi / 8)
        assert np.allclose(np.diff(thetas), np.pi / 4)
        assert thetas[-1] < 2 * np.pi

    @pytest.mark.parametrize("requested, nodes, expected", [(512, 10, 512), (512, 128, 512), (512, 222, 888), (16, 5, 20)])
    def test_sample_count_keeps_four_per_boundary_node(self, requested, nodes, expected):
        assert sample_count(requested, nodes) == expected

    def test_problem_samples_cover_the_boundary(self, coarse_problem):
        assert coarse_problem.samples >= 4 * coarse_problem.assembler.n_e

    def test_disk_boundary_radius(self, coarse_mesh, annulus):
        samples = boundary_radius(coarse_mesh, 256)
        assert samples.count == 256
        assert np.all(samples.values <= annulus.outer_radius + 1e-12)
        assert np.allclose(samples.values, annulus.outer_radius, rtol=1e-2)

    def test_radius_exact_at_polygon_vertices(self):
        thetas = sample_angles(64)
        radii = 1.0 + 0.2 * np.cos(3 * thetas)
        brackets = PolarBrackets(_polygon(radii, thetas), 64)
        assert np.allclose(np.asarray(brackets.radii(_polygon(radii, thetas))), radii, atol=1e-12)

    def test_clockwise_boundary_is_accepted(self):
        thetas = sample_angles(32)[::-1]
        points = _polygon(np.full(32, 2.0), thetas)
        brackets = PolarBrackets(points, 16)
        assert np.allclose(np.asarray(brackets.radii(points)), 2.0)

    def test_backtracking_polygon_is_not_star_like(self):
        thetas = np.array([0.0, 1.0, 0.5, 2.0, 3.0, 4.0, 5.0])
        with pytest.raises(NonStarLikeError) as info:
            PolarBrackets(_polygon(np.ones(7), thetas))
        assert info.value.node == 1

    def test_polygon_missing_the_center(self):
        thetas = np.linspace(0.0, 2 * np.pi, 20, endpoint=False)
        points = _polygon(np.ones(20), thetas) + np.array([3.0, 0.0])
        with pytest.raises(NonStarLikeError):
            PolarBrackets(points)

    def test_boundary_through_center(self):
        points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(NonStarLikeError):
            PolarBrackets(points)


class TestTracking:
    def test_matching_circle_costs_nothing(self):
        samples = RadiusSamples(thetas=sample_angles(64), values=np.full(64, 1.7))
        assert tracking_cost(samples, CircleTarget(1.7)) == 0.0

    def test_constant_offset_cost(self):
        samples = RadiusSamples(thetas=sample_angles(128), values=np.full(128, 2.0))
        assert tracking_cost(samples, CircleTarget(1.5)) == pytest.approx(2 * np.pi * 0.25)

    def test_cost_matches_boundary_radius(self, coarse_mesh):
        target = CosineKeyTarget()
        value, _ = tracking_cost_and_gradient(coarse_mesh.boundary_points, target, 128)
        assert value == pytest.approx(tracking_cost(boundary_radius(coarse_mesh, 128), target), rel=1e-12)

    def test_gradient_matches_central_differences(self, coarse_mesh, rng):
        target = CosineKeyTarget()
        points = coarse_mesh.boundary_points + 0.01 * rng.normal(size=coarse_mesh.boundary_points.shape)
        _, grad = tracking_cost_and_gradient(points, target, 128)
        assert grad.shape == points.shape
        eps = 1e-6
        for _ in range(5):
            d = rng.normal(size=points.shape)
            d /= np.linalg.norm(d)
            plus, _ = tracking_cost_and_gradient(points + eps * d, target, 128)
            minus, _ = tracking_cost_and_gradient(points - eps * d, target, 128)
            fd = (plus - minus) / (2 * eps)
            assert np.sum(grad * d) == pytest.approx(fd, rel=1e-5, abs=1e-9)


class TestGrayPenalty:
    def test_zero_weight_skips_assembly(self):
        assert gray_penalty(None, np.zeros(3), None, 0.0) == 0.0

    def test_penalty_scales_with_eta(self, coarse_problem, rng):
        problem, design, state = coarse_problem
        q = state.stack() + 0.05 * np.concatenate([rng.normal(size=state.n), np.zeros(2 * state.n + state.n_e)])
        one = gray_penalty(problem.assembler, q, design, 1.0)
        assert one > 0.0
        assert gray_penalty(problem.assembler, q, design, 0.25) == pytest.approx(0.25 * one, rel=1e-12)

    def test_gray_report_on_solved_state(self, coarse_problem):
        problem, design, state = coarse_problem
        q = problem.solve_state(design, state).state.stack()
        report = gray_region_report(problem.assembler, q, design)
        assert report.nodes > 0
        assert 0.0 < report.fraction < 1.0
        assert report.u_min <= report.u_max
        assert report.max_deviation >= 0.0

    def test_degenerate_design_is_all_gray(self, coarse_problem):
        problem, design, state = coarse_problem
        report = gray_region_report(problem.assembler, state.stack(), DesignVector.zeros(design.n))
        assert report.fraction == 1.0
        assert report.nodes == problem.assembler.n
