#
# Copyright (c) 2025, sepkit developers
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Winding numbers and periodic-orbit classification.

The index of a periodic orbit is its winding number about the enclosing center
(+1 counterclockwise, -1 clockwise). The turning number of the tangent vector is
available separately as a cross-check; the two agree for convex orbits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from loguru import logger

from sepkit.exceptions import AmbiguousWinding, PointOnCurve
from sepkit.expressions import HolomorphicFunction
from sepkit.flow import (
    DEFAULT_SETTINGS,
    REAL_TIME,
    IntegrationSettings,
    TerminationKind,
    Trajectory,
    integrate,
)

ROUNDING_GUARD = 0.1


@dataclass(frozen=True, eq=False)
class ClosedCurve:
    """Polygon with an implicit edge from the last point back to the first."""

    points: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=complex).ravel()
        if len(points) < 3:
            raise ValueError(f"a closed curve needs at least 3 points, got {len(points)}")
        if np.any(np.roll(points, -1) == points):
            raise ValueError("consecutive curve points must be distinct")
        object.__setattr__(self, "points", points)

    @classmethod
    def from_samples(cls, samples: Sequence[complex], closure_tol: float = 0.0) -> "ClosedCurve":
        """Build a curve from orbit samples, dropping repeats and the closing sample."""
        points = np.asarray(samples, dtype=complex).ravel()
        keep = np.concatenate(([True], np.diff(points) != 0))
        points = points[keep]
        while len(points) > 3 and abs(points[-1] - points[0]) <= closure_tol:
            points = points[:-1]
        return cls(points)

    @property
    def diameter(self) -> float:
        return float(np.hypot(np.ptp(self.points.real), np.ptp(self.points.imag)))

    def reversed(self) -> "ClosedCurve":
        return ClosedCurve(self.points[::-1])

    def rotated(self, shift: int) -> "ClosedCurve":
        return ClosedCurve(np.roll(self.points, shift))


def _round_turns(total_angle: float, what: str) -> int:
    raw = total_angle / (2 * math.pi)
    turns = round(raw)
    if abs(raw - turns) > ROUNDING_GUARD:
        raise AmbiguousWinding(f"{what} {raw:.4f} is not close to an integer; curve is under-sampled", raw)
    return int(turns)


def winding_number(curve: ClosedCurve, p: complex, eps_on_curve: float | None = None) -> int:
    """Signed number of turns the curve makes around p."""
    if eps_on_curve is None:
        eps_on_curve = 1e-9 * curve.diameter
    a = curve.points - complex(p)
    b = np.roll(a, -1)
    edge = b - a
    # distance from p to every edge (vertices included)
    along = np.clip((np.conj(edge) * -a).real / (np.abs(edge) ** 2), 0.0, 1.0)
    distance = np.abs(a + along * edge)
    if distance.min() <= eps_on_curve:
        raise PointOnCurve(f"point {p} lies on the curve (distance {distance.min():.3g})")
    return _round_turns(float(np.sum(np.angle(b / a))), "winding number")


def tangent_winding(curve: ClosedCurve) -> int:
    """Number of turns of the edge direction along the curve."""
    edge = np.roll(curve.points, -1) - curve.points
    turns = np.angle(np.roll(edge, -1) / edge)
    return _round_turns(float(np.sum(turns)), "tangent winding")


class OrbitVerdict(str, Enum):
    PERIODIC = "periodic"
    ESCAPING = "escaping"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True, eq=False)
class OrbitClassification:
    verdict: OrbitVerdict
    center: complex | None
    period: float | None = None
    index: int | None = None
    trajectory: Trajectory | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def is_periodic(self) -> bool:
        return self.verdict is OrbitVerdict.PERIODIC


def _guard_radius(z0: complex, domain: Sequence[float]) -> float:
    x_min, x_max, y_min, y_max = domain
    corners = [complex(x, y) for x in (x_min, x_max) for y in (y_min, y_max)]
    return 2.0 * max(abs(c - z0) for c in corners)


def _orbit_curve(trajectory: Trajectory) -> ClosedCurve:
    tol = trajectory.diagnostics.get("closure_tol", 0.0)
    return ClosedCurve.from_samples(trajectory.points, tol)


def _indeterminate(center, trajectory, reason: str) -> OrbitClassification:
    return OrbitClassification(
        OrbitVerdict.INDETERMINATE,
        center,
        trajectory=trajectory,
        diagnostics={"reason": reason, "samples": len(trajectory) if trajectory is not None else 0},
    )


def classify_orbit(
    f: HolomorphicFunction,
    z0: complex,
    center: complex,
    settings: IntegrationSettings = DEFAULT_SETTINGS,
    domain: Sequence[float] | None = None,
) -> OrbitClassification:
    """Integrate from z0 and decide whether the orbit is periodic around center.

    With a domain, the orbit also counts as escaping once it leaves a guard disc
    of twice the distance from z0 to the farthest domain corner.
    """
    z0, center = complex(z0), complex(center)
    if z0 == center:
        raise ValueError("start point coincides with the center")
    if domain is not None:
        settings = settings.replace(guard_radius=_guard_radius(z0, domain))
    trajectory = integrate(f, z0, REAL_TIME, settings, center=center)
    kind = trajectory.termination.kind
    if kind in (TerminationKind.BLOW_UP, TerminationKind.GUARD_EXIT):
        return OrbitClassification(
            OrbitVerdict.ESCAPING, center, trajectory=trajectory, diagnostics={"termination": kind.value}
        )
    if kind is not TerminationKind.CLOSED_ORBIT:
        return _indeterminate(center, trajectory, f"no closure ({kind.value})")
    return _periodic(trajectory, center)


def _periodic(trajectory: Trajectory, center: complex) -> OrbitClassification:
    try:
        curve = _orbit_curve(trajectory)
        index = winding_number(curve, center)
    except (AmbiguousWinding, PointOnCurve, ValueError) as e:
        logger.warning(f"Closed orbit through {trajectory.start} has no usable winding about {center}: {e}")
        return _indeterminate(center, trajectory, str(e))
    try:
        turning = tangent_winding(curve)
    except AmbiguousWinding:
        turning = None
    return OrbitClassification(
        OrbitVerdict.PERIODIC,
        center,
        period=trajectory.termination.time,
        index=index,
        trajectory=trajectory,
        diagnostics={
            "closure_residual": trajectory.diagnostics.get("closure_residual"),
            "samples": len(trajectory),
            "tangent_winding": turning,
        },
    )


def orbit_index(
    f: HolomorphicFunction,
    z_start: complex,
    center: complex,
    settings: IntegrationSettings = DEFAULT_SETTINGS,
    zero_tol: float = 1e-8,
    domain: Sequence[float] | None = None,
) -> OrbitClassification:
    """Index of the orbit through z_start about the equilibrium center.

    A periodic verdict is only kept for an index of +1 or -1.
    """
    residual = abs(f.evaluate(center))
    if residual >= zero_tol:
        raise ValueError(f"{center} is not an equilibrium of {f} (|f| = {residual:.3g})")
    result = classify_orbit(f, z_start, center, settings, domain)
    if result.is_periodic and result.index not in (1, -1):
        return _indeterminate(center, result.trajectory, f"winding index {result.index} about the center")
    return result


def enclosing_center(
    f: HolomorphicFunction,
    z_start: complex,
    centers: Iterable[complex],
    settings: IntegrationSettings = DEFAULT_SETTINGS,
) -> OrbitClassification:
    """Classify the orbit through z_start against several candidate centers at once.

    The orbit is integrated once (closure armed by tangent turning); the center it
    winds around once is reported with that index.
    """
    trajectory = integrate(f, z_start, REAL_TIME, settings)
    kind = trajectory.termination.kind
    if kind is TerminationKind.BLOW_UP:
        return OrbitClassification(OrbitVerdict.ESCAPING, None, trajectory=trajectory)
    if kind is not TerminationKind.CLOSED_ORBIT:
        return _indeterminate(None, trajectory, f"no closure ({kind.value})")
    for center in centers:
        result = _periodic(trajectory, complex(center))
        if result.is_periodic and result.index in (1, -1):
            return result
    return _indeterminate(None, trajectory, "closed orbit encloses none of the centers")
