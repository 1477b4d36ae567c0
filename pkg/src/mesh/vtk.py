"""
VTK legacy ASCII import/export through meshio.
"""

import logging
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import meshio
import numpy as np

from .topology import boundary_loop
from .types import Mesh, MeshError

logger = logging.getLogger(__name__)


def write_vtk(
    path: Union[str, Path],
    mesh: Mesh,
    point_data: Optional[Dict[str, np.ndarray]] = None,
) -> Path:
    """
    Write triangles plus nodal fields as a legacy ASCII VTK file.

    Floats are printed in shortest round-trip form, so `read_vtk` recovers
    them bit for bit.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    points = np.zeros((mesh.n_nodes, 3))
    points[:, :2] = mesh.nodes
    data = {name: np.asarray(values, dtype=float) for name, values in (point_data or {}).items()}
    for name, values in data.items():
        if values.shape[0] != mesh.n_nodes:
            raise MeshError(f"point field '{name}' has {values.shape[0]} rows for {mesh.n_nodes} nodes")
    out = meshio.Mesh(points=points, cells=[("triangle", np.asarray(mesh.triangles))], point_data=data)
    meshio.write(str(path), out, file_format="vtk42", binary=False)
    logger.debug(f"Wrote {path} ({mesh.n_nodes} nodes, fields={sorted(data)})")
    return path


def read_vtk(path: Union[str, Path], h: Optional[float] = None) -> Tuple[Mesh, Dict[str, np.ndarray]]:
    """
    Read a triangle mesh and its nodal fields.

    The boundary loop is rebuilt from the triangles; `h` defaults to the
    mean boundary edge length.
    """
    data = meshio.read(str(path))
    triangles = None
    for block in data.cells:
        if block.type == "triangle":
            triangles = np.asarray(block.data, dtype=np.int64)
    if triangles is None:
        raise MeshError(f"{path} contains no triangle cells")
    nodes = np.asarray(data.points, dtype=float)[:, :2]
    loop = boundary_loop(triangles)
    if h is None:
        edges = nodes[np.roll(loop, -1)] - nodes[loop]
        h = float(np.mean(np.linalg.norm(edges, axis=1)))
    mesh = Mesh(nodes=nodes, triangles=triangles, boundary=loop, h=h)
    fields = {name: np.asarray(values, dtype=float) for name, values in data.point_data.items()}
    return mesh, fields
