"""
Plain-text emitters: boundary polylines, gradient-check tables and α dumps.
"""

import csv
import logging
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from ..levelset import DesignVector, LevelSetError
from ..objective import RadiusSamples
from ..sensitivity import GradientCheckReport

logger = logging.getLogger(__name__)

BOUNDARY_HEADER = ["theta", "r"]
GRADCHECK_HEADER = ["component", "adjoint", "finite_difference", "relative_error", "newton_solves", "newton_iterations"]


def _open(path: Union[str, Path]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path, open(path, "w", newline="")


def write_boundary_csv(path: Union[str, Path], samples: RadiusSamples) -> Path:
    """(θ, r) rows of the polar radius of a free boundary."""
    path, f = _open(path)
    with f:
        writer = csv.writer(f)
        writer.writerow(BOUNDARY_HEADER)
        for theta, r in zip(samples.thetas, samples.values):
            writer.writerow([repr(float(theta)), repr(float(r))])
    return path


def write_gradcheck_csv(path: Union[str, Path], report: GradientCheckReport) -> Path:
    path, f = _open(path)
    with f:
        writer = csv.writer(f)
        writer.writerow(GRADCHECK_HEADER)
        for row in report.rows:
            writer.writerow(row.row())
    return path


def write_alpha(path: Union[str, Path], design: DesignVector) -> Path:
    """N×N coefficients, one grid row per line, row-major."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, design.alpha, fmt="%.17g")
    return path


def read_alpha(
    path: Union[str, Path],
    n: Optional[int] = None,
    alpha_min: float = -1e20,
    alpha_max: float = 1e20,
) -> DesignVector:
    """
    Read an α file written by `write_alpha` (or any N×N whitespace table).

    Raises:
        LevelSetError: unreadable file, non-square table or size mismatch.
    """
    try:
        alpha = np.loadtxt(path, dtype=float, ndmin=2)
    except (OSError, ValueError) as e:
        raise LevelSetError(f"cannot read coefficients from {path}: {e}")
    if alpha.size and alpha.shape[0] != alpha.shape[1]:
        if alpha.shape[0] == 1 and int(round(np.sqrt(alpha.size))) ** 2 == alpha.size:
            side = int(round(np.sqrt(alpha.size)))
            alpha = alpha.reshape(side, side)
        else:
            raise LevelSetError(f"{path}: expected a square table, got {alpha.shape}")
    if n is not None and alpha.shape[0] != n:
        raise LevelSetError(f"{path}: {alpha.shape[0]}x{alpha.shape[1]} coefficients for N={n}", n)
    try:
        return DesignVector(alpha=alpha, alpha_min=alpha_min, alpha_max=alpha_max)
    except ValueError as e:
        raise LevelSetError(f"{path}: {e}", alpha.shape[0])


def write_table(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Generic CSV table; floats are written in shortest round-trip form."""
    path, f = _open(path)
    with f:
        writer = csv.writer(f)
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return path
