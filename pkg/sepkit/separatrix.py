#
# Copyright (c) 2025, sepkit developers
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Separatrix localization.

Four independent ways to put points on a separatrix of ż = f(z):
- index scan: bisection on a segment between periodic orbits of opposite index
  around two neighbouring centers, verified by a two-sided index-product check
- ZDP: the order-1 zero-derivative set Im f(z) = 0, contoured by marching squares
  and Newton-refined
- BVP: minimum of |z̈(t0)|² over trajectories constrained by Re z(t1) = x*
- curvature: point of maximal curvature along an imaginary-time trajectory
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from loguru import logger
from scipy.optimize import minimize_scalar

from sepkit.equilibria import Equilibrium, EquilibriumType
from sepkit.exceptions import (
    BracketInvalid,
    EmptyContour,
    EvaluationError,
    FlatCurvature,
    InnerNewtonDiverged,
    NoBracket,
    ZeroVelocity,
)
from sepkit.expressions import HolomorphicFunction, second_time_derivative
from sepkit.flow import (
    DEFAULT_SETTINGS,
    IMAGINARY_TIME,
    REAL_TIME,
    IntegrationSettings,
    TimeDirection,
    flow_map,
    integrate,
    propagate,
)
from sepkit.orbits import OrbitClassification, enclosing_center, orbit_index


class Method(str, Enum):
    INDEX_SCAN = "index_scan"
    ZDP = "zdp"
    BVP = "bvp"
    CURVATURE = "curvature"


@dataclass(frozen=True, eq=False)
class SeparatrixCandidate:
    z: complex
    method: Method
    residual: float
    converged: bool = True
    diagnostics: dict = field(default_factory=dict)


def _sorted(candidates: list[SeparatrixCandidate]) -> list[SeparatrixCandidate]:
    return sorted(candidates, key=lambda c: (c.z.real, c.z.imag))


# Index-product test ===================================================================


@dataclass(frozen=True, eq=False)
class IndexCheck:
    z_star: complex
    epsilon: float
    side_0: complex
    side_1: complex
    # index product, None when either side is not a periodic orbit
    result: int | None
    orbits: tuple[OrbitClassification, OrbitClassification]

    @property
    def is_indeterminate(self) -> bool:
        return self.result is None


def index_product_test(
    f: HolomorphicFunction,
    z_star: complex,
    normal: complex,
    epsilon: float,
    centers: tuple[Equilibrium, Equilibrium],
    settings: IntegrationSettings = DEFAULT_SETTINGS,
) -> IndexCheck:
    """Multiply the indices of the orbits through z* ± ε·normal around the two centers.

    A product of -1 puts z* on the common boundary of the two period regions.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    normal = complex(normal)
    if abs(abs(normal) - 1.0) > 1e-9:
        raise ValueError(f"normal must be a unit vector, got |normal| = {abs(normal)}")
    for center in centers:
        if center.kind.type is not EquilibriumType.CENTER:
            raise ValueError(f"equilibrium at {center.z0} is a {center.kind}, not a center")

    z_star = complex(z_star)
    side_0 = z_star + epsilon * normal
    side_1 = z_star - epsilon * normal
    orbit_0 = orbit_index(f, side_0, centers[0].z0, settings)
    orbit_1 = orbit_index(f, side_1, centers[1].z0, settings)
    result = orbit_0.index * orbit_1.index if orbit_0.is_periodic and orbit_1.is_periodic else None
    logger.debug(f"Index check at {z_star} (eps={epsilon}): {orbit_0.index} x {orbit_1.index} -> {result}")
    return IndexCheck(z_star, epsilon, side_0, side_1, result, (orbit_0, orbit_1))


def _check_with_retry(f, z_star, normal, epsilon, centers, settings) -> IndexCheck:
    check = index_product_test(f, z_star, normal, epsilon, centers, settings)
    if check.is_indeterminate:
        logger.info(f"Indeterminate index check at {z_star}, retrying with epsilon={epsilon / 2}")
        check = index_product_test(f, z_star, normal, epsilon / 2, centers, settings)
    return check


def index_scan(
    f: HolomorphicFunction,
    segment: tuple[complex, complex],
    centers: Sequence[Equilibrium],
    epsilon: float,
    settings: IntegrationSettings = DEFAULT_SETTINGS,
    bisect_tol: float = 1e-6,
    samples: int = 8,
) -> list[SeparatrixCandidate]:
    """Walk a segment and bisect every change of orbit index between neighbouring samples."""
    a, b = complex(segment[0]), complex(segment[1])
    if a == b:
        raise ValueError("segment endpoints coincide")
    if samples < 2:
        raise ValueError(f"need at least 2 samples, got {samples}")
    by_point = {complex(c.z0): c for c in centers}
    center_points = list(by_point)
    normal = (b - a) / abs(b - a)

    def label(z: complex) -> OrbitClassification | None:
        result = enclosing_center(f, z, center_points, settings)
        return result if result.is_periodic else None

    walk = [a + t * (b - a) for t in np.linspace(0.0, 1.0, samples)]
    labelled = [(z, label(z)) for z in walk]
    determinate = [(z, lab) for z, lab in labelled if lab is not None]
    brackets = [
        (lo, hi)
        for lo, hi in zip(determinate, determinate[1:])
        if lo[1].index != hi[1].index
    ]
    if not brackets:
        raise NoBracket(f"no change of orbit index along the segment {a} -> {b}")

    candidates = []
    for (lo, lo_label), (hi, hi_label) in brackets:
        resolved = True
        while abs(hi - lo) > bisect_tol:
            width = hi - lo
            for trial in (lo + 0.5 * width, lo + 0.25 * width, lo + 0.75 * width):
                trial_label = label(trial)
                if trial_label is not None:
                    break
            else:
                logger.warning(f"Bisection stalled between {lo} and {hi}: no periodic orbit near the midpoint")
                resolved = False
                break
            if trial_label.index == lo_label.index:
                lo = trial
            else:
                hi = trial
        z_star = 0.5 * (lo + hi)
        bracket_width = abs(hi - lo)
        pair = (by_point[hi_label.center], by_point[lo_label.center])
        check = _check_with_retry(f, z_star, normal, epsilon, pair, settings)
        converged = resolved and bracket_width <= bisect_tol and check.result == -1
        if not converged:
            logger.warning(f"Index-scan candidate at {z_star} unresolved (index product {check.result})")
        candidates.append(
            SeparatrixCandidate(
                z_star,
                Method.INDEX_SCAN,
                bracket_width,
                converged,
                {
                    "bracket_width": bracket_width,
                    "index_below": lo_label.index,
                    "index_above": hi_label.index,
                    "index_product": check.result,
                    "check_epsilon": check.epsilon,
                },
            )
        )
    return _sorted(candidates)


# Zero-derivative principle ============================================================


@dataclass(frozen=True, eq=False)
class ContourPolyline:
    points: np.ndarray
    residuals: np.ndarray

    def candidates(self) -> list[SeparatrixCandidate]:
        return [
            SeparatrixCandidate(complex(z), Method.ZDP, float(r), True)
            for z, r in zip(self.points, self.residuals)
        ]


def _zdp_value(values: np.ndarray, part: str) -> np.ndarray:
    return values.imag if part == "imag" else values.real


def _zdp_gradient(derivative: np.ndarray, part: str) -> np.ndarray:
    # gradient of Im f is (v_x, v_y) = (Im f', Re f'); of Re f it is (Re f', -Im f')
    return 1j * np.conj(derivative) if part == "imag" else np.conj(derivative)


def _crossing(p0: complex, p1: complex, v0: float, v1: float) -> complex:
    t = v0 / (v0 - v1)
    return p0 + min(max(t, 0.0), 1.0) * (p1 - p0)


def _march(f, xs, ys, values, part):
    """Marching squares on the sign of the sampled values; returns edge-keyed segments."""
    positive = values > 0
    finite = np.isfinite(values)
    nodes = xs[None, :] + 1j * ys[:, None]

    def vertex(key):
        kind, i, j = key
        i1, j1 = (i + 1, j) if kind == "h" else (i, j + 1)
        return _crossing(nodes[j, i], nodes[j1, i1], values[j, i], values[j1, i1])

    segments = []
    ny, nx = values.shape
    for j in range(ny - 1):
        row_ok = finite[j, :-1] & finite[j, 1:] & finite[j + 1, :-1] & finite[j + 1, 1:]
        s = positive
        mixed = (s[j, :-1] != s[j, 1:]) | (s[j + 1, :-1] != s[j + 1, 1:]) | (s[j, :-1] != s[j + 1, :-1])
        for i in np.flatnonzero(row_ok & mixed):
            bottom, top = ("h", i, j), ("h", i, j + 1)
            left, right = ("v", i, j), ("v", i + 1, j)
            corners = (s[j, i], s[j, i + 1], s[j + 1, i + 1], s[j + 1, i])
            crossed = [
                edge
                for edge, (c0, c1) in zip(
                    (bottom, right, top, left),
                    ((corners[0], corners[1]), (corners[1], corners[2]), (corners[2], corners[3]), (corners[3], corners[0])),
                )
                if c0 != c1
            ]
            if len(crossed) == 2:
                segments.append(tuple(crossed))
            elif len(crossed) == 4:
                center = complex(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]))
                center_positive = _zdp_value(f.evaluate_grid(np.array([center])), part)[0] > 0
                if center_positive == corners[0]:
                    segments += [(bottom, right), (left, top)]
                else:
                    segments += [(bottom, left), (right, top)]
    return segments, vertex


def _stitch(segments) -> list[list]:
    neighbours: dict = {}
    for p, q in segments:
        neighbours.setdefault(p, []).append(q)
        neighbours.setdefault(q, []).append(p)
    seen = set()
    chains = []
    starts = sorted(k for k, v in neighbours.items() if len(v) == 1) + sorted(neighbours)
    for start in starts:
        if start in seen:
            continue
        chain = [start]
        seen.add(start)
        current = start
        while True:
            nxt = [n for n in neighbours[current] if n not in seen]
            if not nxt:
                break
            current = nxt[0]
            seen.add(current)
            chain.append(current)
        chains.append(chain)
    return chains


def _refine(f: HolomorphicFunction, points: np.ndarray, part: str, refine_tol: float, max_iter: int) -> np.ndarray:
    f_prime = f.derivative(1)
    points = points.copy()
    for _ in range(max_iter):
        g = _zdp_value(f.evaluate_grid(points), part)
        grad = _zdp_gradient(f_prime.evaluate_grid(points), part)
        norm2 = np.abs(grad) ** 2
        todo = np.isfinite(g) & (np.abs(g) >= refine_tol) & (norm2 > 0) & np.isfinite(norm2)
        if not todo.any():
            break
        points[todo] -= g[todo] * grad[todo] / norm2[todo]
    return points


def zdp_curve(
    f: HolomorphicFunction,
    domain: Sequence[float],
    grid_n: int = 200,
    refine_tol: float = 1e-12,
    part: str = "imag",
    max_refine: int = 50,
) -> list[ContourPolyline]:
    """Order-1 ZDP set: along solutions d/dt Im z = Im f(z), so contour Im f = 0.

    part="real" contours Re f = 0 instead (the mirrored variant).
    """
    if grid_n < 8:
        raise ValueError(f"grid_n must be at least 8, got {grid_n}")
    if part not in ("imag", "real"):
        raise ValueError(f"part must be 'imag' or 'real', got {part!r}")
    x_min, x_max, y_min, y_max = domain
    xs = np.linspace(x_min, x_max, grid_n)
    ys = np.linspace(y_min, y_max, grid_n)
    values = _zdp_value(f.evaluate_grid(xs[None, :] + 1j * ys[:, None]), part)

    segments, vertex = _march(f, xs, ys, values, part)
    if not segments:
        raise EmptyContour(f"{part} part of {f} has no sign change on the grid")

    polylines = []
    dropped = 0
    for chain in _stitch(segments):
        raw = np.array([vertex(key) for key in chain], dtype=complex)
        refined = _refine(f, raw, part, refine_tol, max_refine)
        residuals = np.abs(_zdp_value(f.evaluate_grid(refined), part))
        ok = residuals < refine_tol
        dropped += int((~ok).sum())
        if ok.any():
            polylines.append(ContourPolyline(refined[ok], residuals[ok]))
    if dropped:
        logger.warning(f"Dropped {dropped} ZDP vertices that did not refine below {refine_tol}")
    logger.info(f"ZDP contour of {f}: {len(polylines)} polylines, {sum(len(p.points) for p in polylines)} vertices")
    return polylines


# Boundary value problem ===============================================================


@dataclass(frozen=True)
class BvpProblem:
    """min |z̈(t0)|² over trajectories with Re z(t1) = x*.

    The free variable is the point z(t0), searched along Im z(t0) in the bracket.
    t1 < t0 is accepted and places the constraint upstream of the minimized point.
    """

    x_star: float
    t0: float = 0.0
    t1: float = 1.0
    bracket: tuple[float, float] = (-1.0, 1.0)
    newton_tol: float = 1e-12
    max_newton: int = 50
    xatol: float = 1e-9
    fd_step: float = 1e-3

    def __post_init__(self):
        if self.t0 == self.t1:
            raise ValueError("t0 and t1 must differ")
        lo, hi = self.bracket
        if not lo < hi:
            raise ValueError(f"bracket {self.bracket} is degenerate")

    @property
    def duration(self) -> float:
        return self.t1 - self.t0


def oriented_bvp_problem(
    f: HolomorphicFunction,
    x_star: float,
    bracket: tuple[float, float] = (-1.0, 1.0),
    horizon: float = 0.1,
    settings: IntegrationSettings = DEFAULT_SETTINGS,
    **options,
) -> BvpProblem:
    """BvpProblem whose minimized point sits on the side where |z̈| is smaller.

    Flows the bracket midpoint on the line Re z = x* by ±horizon and keeps the
    direction whose end point has the smaller objective.
    """
    mid = complex(x_star, 0.5 * (bracket[0] + bracket[1]))
    upstream = flow_map(f, mid, -horizon, REAL_TIME, settings)
    downstream = flow_map(f, mid, horizon, REAL_TIME, settings)
    forward = abs(second_time_derivative(f, upstream)) <= abs(second_time_derivative(f, downstream))
    return BvpProblem(x_star, 0.0, horizon if forward else -horizon, tuple(bracket), **options)


def bvp_separatrix_point(
    f: HolomorphicFunction,
    problem: BvpProblem,
    settings: IntegrationSettings = DEFAULT_SETTINGS,
) -> SeparatrixCandidate:
    """Nested shooting: outer bounded Brent search over s = Im z(t0) (golden section with
    parabolic steps), inner Newton on Re z(t0) enforcing Re z(t1) = x*.
    """
    x_star, duration = problem.x_star, problem.duration

    def solve_start(s: float) -> tuple[complex, complex, int]:
        r = flow_map(f, complex(x_star, s), -duration, REAL_TIME, settings).real
        best = None
        for iteration in range(1, problem.max_newton + 1):
            z1, w = propagate(f, complex(r, s), duration, settings)
            residual = z1.real - x_star
            if best is None or abs(residual) < abs(best[1].real - x_star):
                best = (complex(r, s), z1, iteration)
            if abs(residual) < problem.newton_tol:
                return complex(r, s), z1, iteration
            if w.real == 0 or not math.isfinite(w.real):
                break
            r -= residual / w.real
        if best is not None and abs(best[1].real - x_star) < 1e-10:
            return best
        raise InnerNewtonDiverged(f"no start point with Im z(t0) = {s} reaches Re z(t1) = {x_star}")

    def objective(s: float) -> float:
        try:
            start, _, _ = solve_start(s)
            return abs(second_time_derivative(f, start)) ** 2
        except (InnerNewtonDiverged, EvaluationError):
            return math.inf

    lo, hi = problem.bracket
    result = minimize_scalar(objective, bounds=(lo, hi), method="bounded", options={"xatol": problem.xatol})
    s_opt = float(result.x)
    if not math.isfinite(result.fun):
        raise InnerNewtonDiverged(f"inner Newton failed everywhere on the bracket {problem.bracket}")
    edge = 1e-5 * (hi - lo)
    if s_opt - lo < edge or hi - s_opt < edge:
        raise BracketInvalid(f"minimum of the objective sits on the bracket edge (Im z(t0) = {s_opt})")

    start, z1, iterations = solve_start(s_opt)
    h = problem.fd_step
    plus, _, _ = solve_start(s_opt + h)
    minus, _, _ = solve_start(s_opt - h)
    slope = (objective(s_opt + h) - objective(s_opt - h)) / abs(plus - minus)
    residual = abs(z1.real - x_star)
    logger.info(f"BVP x*={x_star}: separatrix candidate {z1} (objective {result.fun:.6g})")
    return SeparatrixCandidate(
        z1,
        Method.BVP,
        residual,
        residual < 1e-10,
        {
            "objective": float(result.fun),
            "optimality": slope,
            "start_point": start,
            "newton_iterations": iterations,
            "t0": problem.t0,
            "t1": problem.t1,
        },
    )


# Curvature of imaginary-time trajectories =============================================


def curvature_at(
    f: HolomorphicFunction,
    z: complex,
    direction: TimeDirection = IMAGINARY_TIME,
    tol: float = 1e-14,
) -> float:
    """Signed curvature Im(conj(v)·a)/|v|³ of the trajectory of ż = e^{iθ}f through z."""
    value = f.evaluate(z)
    if abs(value) < tol:
        raise ZeroVelocity(f"velocity of {f} vanishes at {z}")
    phi = direction.factor
    v = phi * value
    a = phi * phi * f.derivative(1).evaluate(z) * value
    return (v.conjugate() * a).imag / abs(v) ** 3


def curvature_max_scan(
    f: HolomorphicFunction,
    z0: complex,
    settings: IntegrationSettings = DEFAULT_SETTINGS,
    velocity_floor: float = 1e-6,
    flat_tol: float = 1e-12,
) -> SeparatrixCandidate:
    """Point of maximal |curvature| along the imaginary-time trajectory through z0."""
    forward = integrate(f, z0, IMAGINARY_TIME, settings)
    backward = integrate(f, z0, IMAGINARY_TIME.reversed(), settings)
    # signed imaginary time along the whole path, increasing in the forward direction
    times = np.concatenate((-backward.times[:0:-1], forward.times))
    points = np.concatenate((backward.points[:0:-1], forward.points))

    kappa = np.full(len(points), np.nan)
    for k, z in enumerate(points):
        z = complex(z)
        try:
            if abs(f.evaluate(z)) >= velocity_floor:
                kappa[k] = abs(curvature_at(f, z, IMAGINARY_TIME))
        except (EvaluationError, ZeroVelocity):
            continue
    if np.count_nonzero(np.isfinite(kappa)) < 3:
        raise FlatCurvature(f"imaginary-time path from {z0} is too short to locate a curvature maximum")
    if np.nanmax(kappa) - np.nanmin(kappa) < flat_tol:
        raise FlatCurvature(f"curvature along the imaginary-time path from {z0} is constant")

    k = int(np.nanargmax(kappa))
    lo, hi = max(k - 1, 0), min(k + 1, len(points) - 1)
    base, t_base = complex(points[lo]), float(times[lo])

    def point(tau: float) -> complex:
        return flow_map(f, base, tau - t_base, IMAGINARY_TIME, settings)

    def negative_kappa(tau: float) -> float:
        try:
            return -abs(curvature_at(f, point(tau), IMAGINARY_TIME))
        except (EvaluationError, ZeroVelocity):
            return 0.0

    span = float(times[hi] - times[lo])
    result = minimize_scalar(
        negative_kappa, bounds=(float(times[lo]), float(times[hi])), method="bounded", options={"xatol": 1e-10 * max(span, 1e-300)}
    )
    z_best = point(float(result.x))
    spacing = max(abs(complex(points[k]) - complex(points[lo])), abs(complex(points[hi]) - complex(points[k])))
    return SeparatrixCandidate(
        z_best,
        Method.CURVATURE,
        spacing,
        True,
        {"curvature": -float(result.fun), "sample_index": k, "imaginary_time": float(result.x)},
    )
