import numpy as np
import pytest

from src.mesh import (
    BoundaryCurve,
    InvertedElementError,
    Mesh,
    MeshError,
    SplineFitError,
    boundary_loop,
    control_count,
    deform,
    edge_set,
    euler_characteristic,
    fit_boundary_spline,
    mesh_disk,
    mesh_polygon,
    min_angle,
    polygon_area,
    read_vtk,
    region_components,
    reinitialize_domain,
    segments_intersect,
    transfer_field,
    write_vtk,
)
from src.objective import boundary_radius


def _ellipse(count, a=1.5, b=1.0):
    theta = 2 * np.pi * np.arange(count) / count
    return np.stack([a * np.cos(theta), b * np.sin(theta)], axis=1)


def test_disk_mesh_quality(coarse_mesh, annulus):
    mesh = coarse_mesh
    assert euler_characteristic(mesh) == 1
    assert mesh.inverted_elements().size == 0
    assert min_angle(mesh) >= 15.0
    radii = np.linalg.norm(mesh.boundary_points, axis=1)
    assert np.allclose(radii, annulus.outer_radius, rtol=1e-14)
    assert np.all(np.linalg.norm(mesh.nodes, axis=1) <= annulus.outer_radius * (1 + 1e-12))
    assert mesh.area() == pytest.approx(polygon_area(mesh.boundary_points), rel=1e-12)


def test_disk_boundary_is_counterclockwise_loop(coarse_mesh):
    loop = boundary_loop(coarse_mesh.triangles)
    assert np.array_equal(loop, coarse_mesh.boundary)
    assert polygon_area(coarse_mesh.boundary_points) > 0


def test_mesh_refines_with_h():
    coarse = mesh_disk(1.0, 0.2)
    fine = mesh_disk(1.0, 0.1)
    assert fine.n_nodes > 2.5 * coarse.n_nodes
    assert fine.n_boundary == int(np.ceil(2 * np.pi / 0.1))


def test_mesh_polygon_keeps_boundary_vertices():
    points = _ellipse(60)
    mesh = mesh_polygon(points, 0.15)
    assert np.array_equal(mesh.boundary, np.arange(60))
    assert np.array_equal(mesh.boundary_points, points)


@pytest.mark.parametrize(
    "points",
    [
        _ellipse(40)[::-1],
        np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]),
        np.array([[0.0, 0.0], [1.0, 0.0]]),
    ],
)
def test_mesh_polygon_rejects_bad_boundaries(points):
    with pytest.raises(MeshError):
        mesh_polygon(points, 0.1)


def test_mesh_node_budget():
    with pytest.raises(MeshError):
        mesh_disk(1.0, 0.01, max_nodes=500)


def test_segments_intersect_detects_bow_tie():
    assert segments_intersect(np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]))
    assert not segments_intersect(_ellipse(30))


def test_edge_set_of_single_triangle():
    edges = edge_set(np.array([[0, 1, 2]]))
    assert edges.tolist() == [[0, 1], [0, 2], [1, 2]]


def test_boundary_loop_rejects_two_components():
    triangles = np.array([[0, 1, 2], [3, 4, 5]])
    with pytest.raises(MeshError):
        boundary_loop(triangles)


def test_deform_and_inversion(coarse_mesh):
    shift = np.tile([0.1, -0.2], coarse_mesh.n_nodes)
    moved = deform(coarse_mesh, shift)
    assert np.allclose(moved.nodes - coarse_mesh.nodes, [0.1, -0.2])
    assert moved.area() == pytest.approx(coarse_mesh.area(), rel=1e-12)

    flip = (-2.0 * coarse_mesh.nodes * np.array([1.0, 0.0])).ravel()
    with pytest.raises(InvertedElementError) as info:
        deform(coarse_mesh, flip)
    assert info.value.triangle >= 0


def test_mesh_validation():
    with pytest.raises(ValueError):
        Mesh(nodes=np.zeros((3, 3)), triangles=[[0, 1, 2]], boundary=[0, 1, 2], h=0.1)
    with pytest.raises(ValueError):
        Mesh(nodes=np.zeros((3, 2)), triangles=[[0, 1, 5]], boundary=[0, 1, 2], h=0.1)
    with pytest.raises(ValueError):
        Mesh(nodes=np.zeros((3, 2)), triangles=[[0, 1, 2]], boundary=[0, 1, 1], h=0.1)


# =============================================================================
# Boundary splines and re-initialization
# =============================================================================


def test_control_count():
    assert control_count(20) == 16
    assert control_count(200) == 50
    assert control_count(10) == 10


def test_spline_fit_reproduces_circle():
    theta = 2 * np.pi * np.arange(120) / 120
    points = 1.3 * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    curve = fit_boundary_spline(points)
    assert isinstance(curve, BoundaryCurve)
    samples = curve(np.linspace(0.0, 1.0, 400, endpoint=False))
    assert np.max(np.abs(np.linalg.norm(samples, axis=1) - 1.3)) < 1e-3
    assert curve.length() == pytest.approx(2 * np.pi * 1.3, rel=1e-3)
    assert np.allclose(curve(0.0), curve(1.0))


def test_spline_resample_is_uniform():
    curve = fit_boundary_spline(_ellipse(100))
    points = curve.resample(0.1)
    spacing = np.linalg.norm(np.roll(points, -1, axis=0) - points, axis=1)
    assert spacing.max() / spacing.min() < 1.05
    assert abs(spacing.mean() - 0.1) < 0.01


def test_spline_fit_errors():
    with pytest.raises(SplineFitError):
        fit_boundary_spline(_ellipse(5))
    doubled = _ellipse(20)
    doubled[3] = doubled[2]
    with pytest.raises(SplineFitError):
        fit_boundary_spline(doubled)


def _boundary_gaps(mesh):
    points = mesh.boundary_points
    return np.linalg.norm(np.roll(points, -1, axis=0) - points, axis=1)


@pytest.mark.parametrize("stretch", [(0.0, 0.0), (0.2, -0.1), (0.35, 0.05)])
def test_reinitialize_domain_preserves_shape(coarse_mesh, stretch):
    deformed = deform(coarse_mesh, (coarse_mesh.nodes * np.array(stretch)).ravel())
    mesh = reinitialize_domain(deformed, 0.3)
    assert euler_characteristic(mesh) == 1
    assert mesh.area() == pytest.approx(deformed.area(), rel=5e-3)
    gaps = _boundary_gaps(mesh)
    assert gaps.max() / gaps.min() <= 1.5
    assert abs(gaps.mean() - 0.3) < 0.05
    assert min_angle(mesh) >= 15.0


def test_reinitialize_domain_is_idempotent(coarse_mesh):
    deformed = deform(coarse_mesh, (coarse_mesh.nodes * np.array([0.2, -0.1])).ravel())
    first = reinitialize_domain(deformed, 0.3)
    second = reinitialize_domain(first, 0.3)
    assert second.n_boundary == first.n_boundary
    distance = np.linalg.norm(second.boundary_points[:, None, :] - first.boundary_points[None, :, :], axis=2)
    assert distance.min(axis=1).max() <= 1e-3
    assert second.area() == pytest.approx(first.area(), rel=1e-3)


def test_reinitialize_undeformed_disk_returns_the_disk(coarse_mesh, annulus):
    mesh = reinitialize_domain(coarse_mesh, 0.3)
    radii = np.linalg.norm(mesh.boundary_points, axis=1)
    assert np.max(np.abs(radii - annulus.outer_radius)) <= 1e-3
    samples = boundary_radius(mesh, 256)
    assert np.allclose(samples.values, boundary_radius(coarse_mesh, 256).values, atol=1e-2)


def test_transfer_field_reproduces_linear_function(coarse_mesh, rng):
    values = 2.0 * coarse_mesh.nodes[:, 0] - coarse_mesh.nodes[:, 1] + 0.5
    points = rng.uniform(-1.0, 1.0, size=(30, 2))
    expected = 2.0 * points[:, 0] - points[:, 1] + 0.5
    assert np.allclose(transfer_field(coarse_mesh, values, points), expected, atol=1e-12)
    far = transfer_field(coarse_mesh, values, np.array([[10.0, 0.0]]))
    assert np.isfinite(far).all()


def test_region_components_counts_separate_blobs(coarse_mesh):
    x = coarse_mesh.nodes[:, 0]
    mask = np.abs(x) > 0.9
    count, labels = region_components(coarse_mesh, mask)
    assert count == 2
    assert np.all(labels[~mask] == -1)
    assert len(set(labels[x > 0.9])) == 1
    assert region_components(coarse_mesh, np.zeros(coarse_mesh.n_nodes, dtype=bool))[0] == 0


# =============================================================================
# VTK
# =============================================================================


def test_vtk_roundtrip_is_bit_exact(tmp_path, coarse_mesh, rng):
    fields = {"u": rng.normal(size=coarse_mesh.n_nodes), "H": rng.uniform(size=coarse_mesh.n_nodes)}
    path = write_vtk(tmp_path / "mesh.vtk", coarse_mesh, fields)
    assert path.read_text().startswith("# vtk DataFile Version")
    mesh, data = read_vtk(path, h=coarse_mesh.h)
    assert np.array_equal(mesh.nodes, coarse_mesh.nodes)
    assert np.array_equal(mesh.triangles, coarse_mesh.triangles)
    assert np.array_equal(mesh.boundary, coarse_mesh.boundary)
    for name, values in fields.items():
        assert np.array_equal(data[name], values)


def test_vtk_rejects_wrong_field_length(tmp_path, coarse_mesh):
    with pytest.raises(MeshError):
        write_vtk(tmp_path / "bad.vtk", coarse_mesh, {"u": np.zeros(3)})
