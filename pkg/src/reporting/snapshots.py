"""
Per-state output bundles: deformed mesh with fields, boundary table, α dump.
"""

import logging
from pathlib import Path
from typing import Dict, Union

import numpy as np

from ..levelset import DesignVector
from ..mesh import write_vtk
from ..objective import boundary_radius
from ..state import StateAssembler
from .tables import write_alpha, write_boundary_csv

logger = logging.getLogger(__name__)


def state_fields(assembler: StateAssembler, q: np.ndarray, design: DesignVector) -> Dict[str, np.ndarray]:
    """Nodal u, H_β(ψ) and displacement magnitude for VTK output."""
    n = assembler.n
    v = np.asarray(q[n : 3 * n]).reshape(n, 2)
    return {
        "u": np.asarray(q[:n], dtype=float),
        "H": assembler.nodal_heaviside(q, design),
        "displacement": np.linalg.norm(v, axis=1),
    }


def write_state_bundle(
    out_dir: Union[str, Path],
    assembler: StateAssembler,
    q: np.ndarray,
    design: DesignVector,
    stem: str = "state",
    samples: int = 512,
    boundary: bool = True,
) -> Dict[str, Path]:
    """
    Write `<stem>.vtk` (deformed mesh, fields) and optionally
    `<stem>_boundary.csv`.
    """
    out_dir = Path(out_dir)
    deformed = assembler.deformed_mesh(q)
    paths = {"vtk": write_vtk(out_dir / f"{stem}.vtk", deformed, state_fields(assembler, q, design))}
    if boundary:
        paths["boundary"] = write_boundary_csv(out_dir / f"{stem}_boundary.csv", boundary_radius(deformed, samples))
    return paths


def write_stage_snapshot(
    out_dir: Union[str, Path],
    stage: int,
    assembler: StateAssembler,
    q: np.ndarray,
    design: DesignVector,
) -> Dict[str, Path]:
    """Stage snapshot: `stage_XX.vtk` and `alpha_stage_XX.txt`."""
    out_dir = Path(out_dir)
    paths = write_state_bundle(out_dir, assembler, q, design, stem=f"stage_{stage:02d}", boundary=False)
    paths["alpha"] = write_alpha(out_dir / f"alpha_stage_{stage:02d}.txt", design)
    logger.info(f"Stage {stage} snapshot written to {out_dir}")
    return paths
