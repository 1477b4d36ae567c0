"""
SVG contour plots of the level-set field and the potential.

Iso-lines come from matplotlib's marching-triangles `tricontour` on the
deformed mesh; the Agg backend keeps rendering headless.
"""

import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import matplotlib.tri as mtri  # noqa: E402
import numpy as np  # noqa: E402

from ..mesh import Mesh  # noqa: E402

logger = logging.getLogger(__name__)

LEVELSET_LEVELS = (0.05, 0.5, 0.95)

# Fixed salt so SVG element ids do not change between runs.
matplotlib.rcParams["svg.hashsalt"] = "bernoulli-shape"


def _axes(mesh: Mesh, title: str):
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.set_aspect("equal")
    ax.set_title(title)
    loop = np.append(mesh.boundary, mesh.boundary[0])
    ax.plot(mesh.nodes[loop, 0], mesh.nodes[loop, 1], color="black", linewidth=0.8)
    return fig, ax


def _save(fig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.debug(f"Wrote {path}")
    return path


def _triangulation(mesh: Mesh) -> mtri.Triangulation:
    return mtri.Triangulation(mesh.nodes[:, 0], mesh.nodes[:, 1], mesh.triangles)


def plot_levelset_svg(
    path: Union[str, Path],
    mesh: Mesh,
    heaviside: np.ndarray,
    target: Optional[np.ndarray] = None,
    levels: Sequence[float] = LEVELSET_LEVELS,
    title: str = "H(psi)",
) -> Path:
    """
    Iso-lines of H_β(ψ) at `levels` on `mesh`, with the target curve overlaid.

    Args:
        heaviside: nodal H_β(ψ) values
        target: closed target curve as (m, 2) points, or None
    """
    fig, ax = _axes(mesh, title)
    values = np.asarray(heaviside, dtype=float)
    if values.max() > min(levels) and values.min() < max(levels):
        contours = ax.tricontour(_triangulation(mesh), values, levels=sorted(levels), cmap="viridis", linewidths=1.0)
        ax.clabel(contours, fmt="%.2f", fontsize=7)
    else:
        logger.warning(f"H(psi) in [{values.min():.3g}, {values.max():.3g}]: no iso-line to draw")
    if target is not None:
        curve = np.vstack([target, target[:1]])
        ax.plot(curve[:, 0], curve[:, 1], color="tab:red", linestyle="--", linewidth=1.0, label="target")
        ax.legend(loc="upper right", fontsize=8)
    return _save(fig, path)


def plot_potential_svg(path: Union[str, Path], mesh: Mesh, potential: np.ndarray, count: int = 11, title: str = "u") -> Path:
    """Iso-lines of the potential u_h at `count` equally spaced levels in [0, 1]."""
    fig, ax = _axes(mesh, title)
    values = np.asarray(potential, dtype=float)
    if np.ptp(values) > 0:
        contours = ax.tricontour(_triangulation(mesh), values, levels=np.linspace(0.0, 1.0, count), cmap="plasma", linewidths=0.8)
        fig.colorbar(contours, ax=ax, shrink=0.8)
    return _save(fig, path)
