"""
Reporting Module

File emitters for runs: CSV tables, α dumps, VTK state bundles and SVG
contour plots.
"""

from .plots import LEVELSET_LEVELS, plot_levelset_svg, plot_potential_svg
from .snapshots import state_fields, write_stage_snapshot, write_state_bundle
from .tables import read_alpha, write_alpha, write_boundary_csv, write_gradcheck_csv, write_table

__all__ = [
    "LEVELSET_LEVELS",
    "plot_levelset_svg",
    "plot_potential_svg",
    "state_fields",
    "write_stage_snapshot",
    "write_state_bundle",
    "read_alpha",
    "write_alpha",
    "write_boundary_csv",
    "write_gradcheck_csv",
    "write_table",
]
