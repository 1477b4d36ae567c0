"""
Mesh module for the reference and deformed triangulations.

The state problem lives on a P1 triangulation of the reference domain Ω̂;
the pseudo-solid displacement maps it to the current domain. Periodically
the reference domain is rebuilt from the deformed boundary.
"""

from .types import BoundaryCurve, InvertedElementError, Mesh, MeshError, SplineFitError
from .generator import deform, mesh_disk, mesh_polygon, reinitialize_domain
from .spline import control_count, fit_boundary_spline
from .topology import (
    boundary_loop,
    edge_set,
    euler_characteristic,
    min_angle,
    polygon_area,
    region_components,
    segments_intersect,
    transfer_field,
)
from .vtk import read_vtk, write_vtk

__all__ = [
    "BoundaryCurve",
    "InvertedElementError",
    "Mesh",
    "MeshError",
    "SplineFitError",
    "deform",
    "mesh_disk",
    "mesh_polygon",
    "reinitialize_domain",
    "control_count",
    "fit_boundary_spline",
    "boundary_loop",
    "edge_set",
    "euler_characteristic",
    "min_angle",
    "polygon_area",
    "region_components",
    "segments_intersect",
    "transfer_field",
    "read_vtk",
    "write_vtk",
]
