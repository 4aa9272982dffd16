#
# Copyright (c) 2025, sepkit developers
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""SVG phase portraits and direction fields.

Every trajectory line carries the gid "trajectory-<k>" and its arrowhead
"arrow-<k>"; field arrows are "arrow-<k>" in row-major grid order.
"""

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from sepkit.equilibria import Equilibrium, EquilibriumType

matplotlib.rcParams["svg.hashsalt"] = "sepkit"

_MARKERS = {
    EquilibriumType.CENTER: ("o", "tab:red"),
    EquilibriumType.NODE: ("s", "tab:green"),
    EquilibriumType.FOCUS: ("D", "tab:purple"),
    EquilibriumType.DEGENERATE: ("x", "black"),
}


def _axes(domain: Sequence[float], title: str):
    x_min, x_max, y_min, y_max = domain
    fig, ax = plt.subplots(figsize=(8, 8 * (y_max - y_min) / (x_max - x_min) + 0.5))
    ax.set_xlim(x_min, x_max)
    ax.set_ylim(y_min, y_max)
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title(title)
    return fig, ax


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _draw_equilibria(ax, equilibria: Sequence[Equilibrium]):
    for k, eq in enumerate(equilibria):
        marker, color = _MARKERS[eq.kind.type]
        (point,) = ax.plot(eq.z0.real, eq.z0.imag, marker=marker, color=color, markersize=7, linestyle="none")
        point.set_gid(f"equilibrium-{k}")


def portrait_svg(
    path: str | Path,
    title: str,
    domain: Sequence[float],
    trajectories: Sequence[np.ndarray],
    equilibria: Sequence[Equilibrium] = (),
    candidates: Sequence[complex] = (),
) -> Path:
    """One line and one arrowhead per trajectory, oriented along increasing time.

    candidates are separatrix points drawn as stars on top of the trajectories.
    """
    fig, ax = _axes(domain, title)
    for k, points in enumerate(trajectories):
        points = np.asarray(points, dtype=complex)
        (line,) = ax.plot(points.real, points.imag, color="tab:blue", linewidth=0.6)
        line.set_gid(f"trajectory-{k}")
        if len(points) >= 2:
            m = (len(points) - 1) // 2
            tail, head = points[m], points[m + 1]
        else:
            tail, head = points[0], points[0] + 1e-9
        arrow = ax.annotate(
            "",
            xy=(head.real, head.imag),
            xytext=(tail.real, tail.imag),
            arrowprops={"arrowstyle": "-|>", "color": "tab:blue", "linewidth": 0.6, "shrinkA": 0, "shrinkB": 0},
            annotation_clip=False,
        )
        arrow.arrow_patch.set_gid(f"arrow-{k}")
    _draw_equilibria(ax, equilibria)
    for k, z in enumerate(candidates):
        (point,) = ax.plot(z.real, z.imag, marker="*", color="tab:orange", markersize=9, linestyle="none")
        point.set_gid(f"candidate-{k}")
    return _save(fig, path)


def field_svg(
    path: str | Path,
    title: str,
    domain: Sequence[float],
    grid: np.ndarray,
    values: np.ndarray,
) -> Path:
    """Unit-length arrows of the field direction at every grid node."""
    fig, ax = _axes(domain, title)
    grid, values = grid.ravel(), values.ravel()
    x_min, x_max, y_min, y_max = domain
    n = max(int(round(np.sqrt(len(grid)))), 2)
    length = 0.4 * min(x_max - x_min, y_max - y_min) / (n - 1)
    with np.errstate(all="ignore"):
        direction = values / np.abs(values)
    for k, (z, d) in enumerate(zip(grid, direction)):
        if not np.isfinite(d):
            d = 1e-6 + 0j
        tail = z - 0.5 * length * d
        arrow = ax.annotate(
            "",
            xy=((tail + length * d).real, (tail + length * d).imag),
            xytext=(tail.real, tail.imag),
            arrowprops={"arrowstyle": "->", "color": "tab:gray", "linewidth": 0.8, "shrinkA": 0, "shrinkB": 0},
            annotation_clip=False,
        )
        arrow.arrow_patch.set_gid(f"arrow-{k}")
    return _save(fig, path)
