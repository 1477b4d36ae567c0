"""
Mesh Generator
==============

Quality triangulations of the reference domain with the Triangle library
(constrained Delaunay refinement), deformation to the current configuration
and re-initialization of the reference domain from a deformed mesh.
"""

import logging
from typing import Optional

import numpy as np
import triangle

from .spline import fit_boundary_spline
from .topology import boundary_loop, polygon_area, segments_intersect
from .types import InvertedElementError, Mesh, MeshError

logger = logging.getLogger(__name__)

MIN_ANGLE = 25.0
DEFAULT_MAX_NODES = 200_000


def _max_area(h: float) -> float:
    return np.sqrt(3.0) / 4.0 * h * h


def mesh_polygon(
    boundary_points: np.ndarray,
    h: float,
    max_nodes: int = DEFAULT_MAX_NODES,
    min_angle: float = MIN_ANGLE,
) -> Mesh:
    """
    Triangulate the interior of a simple closed polygon.

    The polygon vertices become nodes 0..n_b−1 in the given order and are
    never split, so they form the boundary loop of the result. Interior
    triangles are refined to area ≤ (√3/4)h² with minimum angle `min_angle`.

    Raises:
        MeshError: self-intersecting input, node budget exceeded, or a
            triangulation whose boundary differs from the input loop.
    """
    pts = np.asarray(boundary_points, dtype=float)
    nb = len(pts)
    if nb < 3:
        raise MeshError("polygon needs at least 3 vertices", nb)
    if not h > 0:
        raise MeshError(f"mesh size must be positive, got {h}")
    if polygon_area(pts) < 0:
        raise MeshError("boundary polygon must be counterclockwise", nb)
    if segments_intersect(pts):
        raise MeshError("boundary polygon intersects itself", nb)

    estimate = nb + 0.6 * polygon_area(pts) / _max_area(h)
    if estimate > max_nodes:
        raise MeshError(f"mesh size h={h:g} needs about {int(estimate)} nodes, budget is {max_nodes}", int(estimate))

    segments = np.stack([np.arange(nb), (np.arange(nb) + 1) % nb], axis=1)
    switches = f"pq{min_angle:g}a{_max_area(h):.12g}YQ"
    try:
        result = triangle.triangulate({"vertices": pts, "segments": segments}, switches)
    except Exception as e:
        raise MeshError(f"triangulation failed: {e}", nb)

    nodes = np.asarray(result["vertices"], dtype=float)
    tris = np.asarray(result["triangles"], dtype=np.int64)
    if len(nodes) > max_nodes:
        raise MeshError(f"triangulation produced {len(nodes)} nodes, budget is {max_nodes}", len(nodes))
    if not np.array_equal(nodes[:nb], pts):
        raise MeshError("mesher moved boundary vertices", len(nodes))

    p = nodes[tris]
    det = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    flip = det < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]

    loop = boundary_loop(tris)
    if not np.array_equal(loop, np.arange(nb)):
        raise MeshError("triangulation boundary does not match the input polygon", len(nodes))

    mesh = Mesh(nodes=nodes, triangles=tris, boundary=loop, h=h)
    bad = mesh.inverted_elements()
    if bad.size:
        raise InvertedElementError(bad[0], mesh.signed_areas()[bad[0]])
    logger.debug(f"Meshed polygon: {nb} boundary nodes, {mesh.n_nodes} nodes, {mesh.n_triangles} triangles")
    return mesh


def mesh_disk(radius: float, h: float, max_nodes: int = DEFAULT_MAX_NODES) -> Mesh:
    """
    Triangulation of B(0, radius) with boundary spacing ≈ h.

    Boundary node k sits exactly at radius·(cos 2πk/n_b, sin 2πk/n_b).
    """
    if not radius > 0:
        raise MeshError(f"disk radius must be positive, got {radius}")
    if not 0 < h < radius:
        raise MeshError(f"mesh size must satisfy 0 < h < R, got h={h}, R={radius}")
    nb = max(8, int(np.ceil(2.0 * np.pi * radius / h)))
    theta = 2.0 * np.pi * np.arange(nb) / nb
    boundary = radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    return mesh_polygon(boundary, h, max_nodes=max_nodes)


def deform(mesh: Mesh, displacement: np.ndarray, check: bool = True) -> Mesh:
    """
    Deformed mesh X = X̂ + v with the same connectivity.

    Args:
        mesh: reference mesh
        displacement: (n, 2) nodal displacements, or the flat q_v layout
            (2n,) with entry 2i + d
        check: raise on inverted triangles

    Raises:
        InvertedElementError: a triangle with signed area ≤ 0 (when `check`).
    """
    v = np.asarray(displacement, dtype=float).reshape(mesh.n_nodes, 2)
    deformed = mesh.with_nodes(mesh.nodes + v)
    if check:
        bad = deformed.inverted_elements()
        if bad.size:
            raise InvertedElementError(bad[0], deformed.signed_areas()[bad[0]])
    return deformed


def reinitialize_domain(
    deformed: Mesh,
    h: float,
    max_nodes: int = DEFAULT_MAX_NODES,
    n_control: Optional[int] = None,
) -> Mesh:
    """
    New reference mesh from the outer boundary of a deformed mesh.

    Fits a closed least-squares cubic B-spline to the deformed boundary
    nodes, distributes nodes on it at uniform arclength spacing ≈ h and
    remeshes the interior.
    """
    bad = deformed.inverted_elements()
    if bad.size:
        raise InvertedElementError(bad[0], deformed.signed_areas()[bad[0]])
    curve = fit_boundary_spline(deformed.boundary_points, n_control=n_control)
    points = curve.resample(h)
    mesh = mesh_polygon(points, h, max_nodes=max_nodes)
    logger.info(
        f"Reinitialized domain: area {deformed.area():.6f} -> {mesh.area():.6f}, "
        f"{deformed.n_boundary} -> {mesh.n_boundary} boundary nodes"
    )
    return mesh
