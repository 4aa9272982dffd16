#
# Copyright (c) 2025, sepkit developers
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""JSON and CSV writers.

Output is deterministic: keys are sorted, floats are written with repr, complex
numbers become [re, im] pairs and non-finite numbers become null.
"""

import csv
import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from sepkit.equilibria import Equilibrium
from sepkit.flow import Trajectory
from sepkit.separatrix import ContourPolyline, SeparatrixCandidate


def to_jsonable(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (complex, np.complexfloating)):
        return [to_jsonable(value.real), to_jsonable(value.imag)]
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in value]
    return value


def document(config: dict, results: list, diagnostics: dict) -> dict:
    return to_jsonable({"config": config, "results": results, "diagnostics": diagnostics})


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path: str | Path, doc: dict) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fp:
        fp.write(dumps(doc))
    return path


def _write_rows(path: str | Path, header: Iterable[str], rows: Iterable[Iterable[float]]) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])
    return path


def write_trajectory_csv(path: str | Path, times: np.ndarray, points: np.ndarray) -> Path:
    return _write_rows(path, ("t", "re", "im"), zip(times, points.real, points.imag))


def write_field_csv(path: str | Path, grid: np.ndarray, values: np.ndarray) -> Path:
    grid, values = grid.ravel(), values.ravel()
    return _write_rows(path, ("x", "y", "fx", "fy"), zip(grid.real, grid.imag, values.real, values.imag))


def equilibrium_record(eq: Equilibrium) -> dict:
    return {
        "z": eq.z0,
        "f_prime": eq.f_prime,
        "type": eq.kind.type,
        "stable": eq.kind.stable,
        "orientation": eq.kind.orientation,
        "residual": eq.residual,
    }


def candidate_record(candidate: SeparatrixCandidate) -> dict:
    return {
        "z": candidate.z,
        "method": candidate.method,
        "residual": candidate.residual,
        "converged": candidate.converged,
        "diagnostics": candidate.diagnostics,
    }


def polyline_record(polyline: ContourPolyline) -> dict:
    return {
        "points": list(polyline.points),
        "max_residual": float(polyline.residuals.max()),
        "converged": True,
    }


def trajectory_record(name: str, trajectory: Trajectory) -> dict:
    termination = trajectory.termination
    return {
        "direction": name,
        "theta": trajectory.direction.theta,
        "termination": termination.kind,
        "time": termination.time,
        "reason": termination.reason,
        "end": trajectory.end,
        "samples": len(trajectory),
    }
