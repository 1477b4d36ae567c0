"""
Mesh topology and quality helpers.
"""

from typing import Tuple

import matplotlib.tri as mtri
import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .types import Mesh, MeshError


def edge_set(triangles: np.ndarray) -> np.ndarray:
    """Unique undirected edges as sorted (i, j) pairs, shape (n_edges, 2)."""
    tri = np.asarray(triangles)
    edges = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
    return np.unique(np.sort(edges, axis=1), axis=0)


def directed_boundary_edges(triangles: np.ndarray) -> np.ndarray:
    """Directed edges (i → j) used by exactly one triangle, oriented as in that triangle."""
    tri = np.asarray(triangles)
    directed = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
    key = np.sort(directed, axis=1)
    _, inverse, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    return directed[counts[inverse.reshape(-1)] == 1]


def boundary_loop(triangles: np.ndarray) -> np.ndarray:
    """
    Ordered outer boundary loop, starting at its smallest node index.

    Raises:
        MeshError: the boundary edges do not form exactly one closed loop.
    """
    edges = directed_boundary_edges(triangles)
    if len(edges) < 3:
        raise MeshError("mesh has no boundary loop")
    successor = {}
    for i, j in edges:
        if i in successor:
            raise MeshError(f"boundary node {i} has two outgoing edges")
        successor[int(i)] = int(j)

    start = min(successor)
    loop = [start]
    while True:
        nxt = successor[loop[-1]]
        if nxt == start:
            break
        if len(loop) > len(successor):
            raise MeshError("boundary edges do not close")
        loop.append(nxt)
    if len(loop) != len(successor):
        raise MeshError(f"boundary has more than one loop ({len(successor)} edges, loop of {len(loop)})")
    return np.array(loop, dtype=np.int64)


def euler_characteristic(mesh: Mesh) -> int:
    """V − E + F; 1 for a disk-like triangulation."""
    return mesh.n_nodes - len(edge_set(mesh.triangles)) + mesh.n_triangles


def min_angle(mesh: Mesh) -> float:
    """Smallest interior angle over all triangles, in degrees."""
    p = mesh.nodes[mesh.triangles]
    angles = []
    for a in range(3):
        u = p[:, (a + 1) % 3] - p[:, a]
        v = p[:, (a + 2) % 3] - p[:, a]
        cos = np.sum(u * v, axis=1) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
        angles.append(np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))))
    return float(np.min(angles))


def polygon_area(points: np.ndarray) -> float:
    """Shoelace area; positive for a counterclockwise polygon."""
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def segments_intersect(points: np.ndarray) -> bool:
    """True when two non-adjacent edges of the closed polygon cross or touch."""
    p = np.asarray(points, dtype=float)
    n = len(p)
    a, b = p, np.roll(p, -1, axis=0)

    def orient(p0, p1, q):
        return (p1[..., 0] - p0[..., 0]) * (q[..., 1] - p0[..., 1]) - (p1[..., 1] - p0[..., 1]) * (q[..., 0] - p0[..., 0])

    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]
    d1 = orient(a[i], b[i], a[j])
    d2 = orient(a[i], b[i], b[j])
    d3 = orient(a[j], b[j], a[i])
    d4 = orient(a[j], b[j], b[i])
    return bool(np.any((d1 * d2 <= 0) & (d3 * d4 <= 0)))


def region_components(mesh: Mesh, node_mask: np.ndarray) -> Tuple[int, np.ndarray]:
    """
    Connected components of the node set `node_mask` along mesh edges.

    Returns:
        (count, labels) where labels is −1 outside the mask.
    """
    mask = np.asarray(node_mask, dtype=bool)
    labels = np.full(mesh.n_nodes, -1, dtype=np.int64)
    selected = np.flatnonzero(mask)
    if selected.size == 0:
        return 0, labels

    edges = edge_set(mesh.triangles)
    edges = edges[mask[edges[:, 0]] & mask[edges[:, 1]]]
    local = np.full(mesh.n_nodes, -1, dtype=np.int64)
    local[selected] = np.arange(selected.size)
    graph = sp.coo_matrix(
        (np.ones(len(edges)), (local[edges[:, 0]], local[edges[:, 1]])),
        shape=(selected.size, selected.size),
    )
    count, comp = connected_components(graph, directed=False)
    labels[selected] = comp
    return int(count), labels


def transfer_field(mesh: Mesh, values: np.ndarray, points: np.ndarray) -> np.ndarray:
    """
    P1 interpolation of nodal `values` on `mesh` at `points`.

    Points outside the triangulation take the value of the nearest node.
    """
    tri = mtri.Triangulation(mesh.nodes[:, 0], mesh.nodes[:, 1], mesh.triangles)
    interp = mtri.LinearTriInterpolator(tri, np.asarray(values, dtype=float))
    points = np.asarray(points, dtype=float)
    result = np.ma.filled(interp(points[:, 0], points[:, 1]).astype(float), np.nan)
    missing = ~np.isfinite(result)
    if np.any(missing):
        _, nearest = cKDTree(mesh.nodes).query(points[missing])
        result[missing] = np.asarray(values, dtype=float)[nearest]
    return result
