#
# Copyright (c) 2025, sepkit developers
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Trajectories of ż = e^{iθ}·f(z) in rotated complex time.

The integrator is the Dormand–Prince 4(5) pair from scipy, stepped one accepted
step at a time on the (Re z, Im z) system so that the run can stop on:
- blow-up (|z| beyond a large radius, the computable proxy for a finite escape time)
- orbit closure (Poincaré section through the start point, armed after almost a
  full turn of accumulated angle)
- leaving a guard disc around a tracked center
- step-size underflow or the time limit
"""

from __future__ import annotations

import cmath
import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from loguru import logger
from scipy.integrate import RK45, solve_ivp
from scipy.optimize import brentq

from sepkit.exceptions import DomainError, EvaluationError, EvaluationOverflow
from sepkit.expressions import HolomorphicFunction

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TimeDirection:
    """Direction θ of the time ray t = s·e^{iθ}, s ≥ 0.

    θ = 0 is real time, θ = π/2 imaginary time, θ = π sign-switched real time.
    """

    theta: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise ValueError(f"theta must be finite, got {self.theta}")
        object.__setattr__(self, "theta", self.theta % TWO_PI)

    @property
    def factor(self) -> complex:
        # quarter turns are exact so that real and imaginary time fields stay orthogonal
        quarter = self.theta / (math.pi / 2)
        k = round(quarter)
        if abs(quarter - k) < 1e-12:
            return (1 + 0j, 1j, -1 + 0j, -1j)[k % 4]
        return cmath.exp(1j * self.theta)

    def reversed(self) -> "TimeDirection":
        return TimeDirection(self.theta + math.pi)


REAL_TIME = TimeDirection(0.0)
IMAGINARY_TIME = TimeDirection(math.pi / 2)
REVERSED_TIME = TimeDirection(math.pi)


@dataclass(frozen=True)
class IntegrationSettings:
    rtol: float = 1e-10
    atol: float = 1e-12
    h_init: float = 1e-3
    h_min: float = 1e-14
    r_blowup: float = 1e6
    t_max: float = 200.0
    max_steps: int = 1_000_000
    # closure tolerance is closure_rtol times the orbit extent (at least 1)
    closure_rtol: float = 1e-8
    closure_angle: float = 1.9 * math.pi
    guard_radius: float | None = None

    def __post_init__(self):
        for name in ("rtol", "atol", "h_init", "h_min", "r_blowup", "t_max", "max_steps", "closure_rtol"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"integration setting {name} must be positive, got {value}")
        if not self.h_min < self.h_init:
            raise ValueError(f"h_min ({self.h_min}) must be smaller than h_init ({self.h_init})")
        if self.guard_radius is not None and not self.guard_radius > 0:
            raise ValueError(f"guard_radius must be positive, got {self.guard_radius}")

    def replace(self, **changes) -> "IntegrationSettings":
        return dataclasses.replace(self, **changes)


DEFAULT_SETTINGS = IntegrationSettings()


class TerminationKind(str, Enum):
    MAX_TIME = "max_time"
    BLOW_UP = "blow_up"
    CLOSED_ORBIT = "closed_orbit"
    STEP_UNDERFLOW = "step_underflow"
    GUARD_EXIT = "guard_exit"


@dataclass(frozen=True)
class Termination:
    kind: TerminationKind
    # escape-time estimate for BLOW_UP, period for CLOSED_ORBIT
    time: float | None = None
    reason: str = ""


@dataclass(frozen=True, eq=False)
class Trajectory:
    direction: TimeDirection
    times: np.ndarray
    points: np.ndarray
    termination: Termination
    diagnostics: dict = field(default_factory=dict)

    @property
    def start(self) -> complex:
        return complex(self.points[0])

    @property
    def end(self) -> complex:
        return complex(self.points[-1])

    def __len__(self):
        return len(self.times)


@dataclass(frozen=True, eq=False)
class EscapeReport:
    forward: Trajectory
    backward: Trajectory

    @property
    def is_positive_separatrix(self) -> bool:
        return self.forward.termination.kind is TerminationKind.BLOW_UP

    @property
    def is_negative_separatrix(self) -> bool:
        return self.backward.termination.kind is TerminationKind.BLOW_UP

    @property
    def is_separatrix(self) -> bool:
        return self.is_positive_separatrix or self.is_negative_separatrix


def _as_complex(y: np.ndarray) -> complex:
    return complex(y[0], y[1])


def integrate(
    f: HolomorphicFunction,
    z0: complex,
    direction: TimeDirection = REAL_TIME,
    settings: IntegrationSettings = DEFAULT_SETTINGS,
    center: complex | None = None,
) -> Trajectory:
    """Integrate ż = e^{iθ}·f(z) from z0 until the first applicable verdict.

    With a center, closure is armed by the angle accumulated around it and the
    guard disc (settings.guard_radius) is measured from it. Without one, the
    turning of the velocity vector is accumulated instead.
    """
    z0 = complex(z0)
    if not (math.isfinite(z0.real) and math.isfinite(z0.imag)):
        raise ValueError(f"initial point must be finite, got {z0}")
    factor = direction.factor

    def rhs(t, y):
        w = factor * f.evaluate(_as_complex(y))
        return np.array([w.real, w.imag])

    times = [0.0]
    points = [z0]

    def finish(kind: TerminationKind, time: float | None = None, reason: str = "", **diagnostics):
        logger.debug(f"Trajectory from {z0} (theta={direction.theta:.6g}) ended: {kind.value} at t={times[-1]:.6g}")
        return Trajectory(
            direction,
            np.asarray(times, dtype=float),
            np.asarray(points, dtype=complex),
            Termination(kind, time, reason),
            diagnostics,
        )

    try:
        v0 = factor * f.evaluate(z0)
    except EvaluationOverflow:
        return finish(TerminationKind.BLOW_UP, 0.0, "right-hand side overflows at the start point")
    if v0 == 0:
        return finish(TerminationKind.MAX_TIME, reason="start point is an equilibrium")

    solver = RK45(
        rhs,
        0.0,
        np.array([z0.real, z0.imag]),
        settings.t_max,
        rtol=settings.rtol,
        atol=settings.atol,
        first_step=min(settings.h_init, settings.t_max),
    )

    def section(z: complex) -> float:
        return (v0.conjugate() * (z - z0)).real

    def underflow(reason: str, steps: int):
        # a collapse at speed above r_blowup counts as escape
        speed = abs(_as_complex(solver.f))
        if speed > settings.r_blowup:
            return finish(TerminationKind.BLOW_UP, times[-1], f"{reason}; speed {speed:.3g} exceeds r_blowup", steps=steps)
        return finish(TerminationKind.STEP_UNDERFLOW, reason=reason, steps=steps)

    angle = 0.0
    extent = 0.0
    v_prev = v0
    z_prev = z0
    steps = 0
    while True:
        if steps >= settings.max_steps:
            return finish(TerminationKind.MAX_TIME, reason="max_steps reached", steps=steps)
        t_prev = solver.t
        try:
            solver.step()
        except EvaluationOverflow:
            return finish(TerminationKind.BLOW_UP, t_prev, "right-hand side overflowed", steps=steps)
        except DomainError as e:
            return finish(TerminationKind.STEP_UNDERFLOW, reason=str(e), steps=steps)
        if solver.status == "failed":
            return underflow("step size collapsed", steps)
        steps += 1
        t = solver.t
        z = _as_complex(solver.y)

        if abs(z) > settings.r_blowup:
            dense = solver.dense_output()
            t_star = brentq(lambda s: abs(_as_complex(dense(s))) - settings.r_blowup, t_prev, t)
            times.append(t_star)
            points.append(_as_complex(dense(t_star)))
            return finish(TerminationKind.BLOW_UP, t_star, steps=steps)

        if center is not None and settings.guard_radius is not None and abs(z - center) > settings.guard_radius:
            times.append(t)
            points.append(z)
            return finish(TerminationKind.GUARD_EXIT, steps=steps)

        times.append(t)
        points.append(z)
        extent = max(extent, abs(z - z0))

        if center is not None:
            angle += cmath.phase((z - center) / (z_prev - center))
        else:
            v = _as_complex(solver.f)
            if v != 0 and v_prev != 0:
                angle += cmath.phase(v / v_prev)
            v_prev = v

        if abs(angle) >= settings.closure_angle and section(z_prev) < 0 <= section(z):
            dense = solver.dense_output()
            period = brentq(lambda s: section(_as_complex(dense(s))), t_prev, t)
            z_close = _as_complex(dense(period))
            residual = abs(z_close - z0)
            closure_tol = settings.closure_rtol * max(1.0, extent)
            if residual < closure_tol:
                times[-1] = period
                points[-1] = z_close
                return finish(
                    TerminationKind.CLOSED_ORBIT,
                    period,
                    steps=steps,
                    closure_residual=residual,
                    closure_tol=closure_tol,
                    accumulated_angle=angle,
                )
            logger.debug(f"Section crossing at t={period:.6g} missed the start point by {residual:.3g}")
        z_prev = z

        if solver.status == "finished":
            return finish(TerminationKind.MAX_TIME, steps=steps)
        if solver.step_size < settings.h_min:
            return underflow("step below h_min", steps)


def escape_report(
    f: HolomorphicFunction, z0: complex, settings: IntegrationSettings = DEFAULT_SETTINGS
) -> EscapeReport:
    """Run real time forward and backward; a finite escape time flags a separatrix."""
    forward = integrate(f, z0, REAL_TIME, settings)
    backward = integrate(f, z0, REVERSED_TIME, settings)
    report = EscapeReport(forward, backward)
    if report.is_separatrix:
        logger.info(
            f"Trajectory through {z0} is a separatrix "
            f"(positive={report.is_positive_separatrix}, negative={report.is_negative_separatrix})"
        )
    return report


def flow_map(
    f: HolomorphicFunction,
    z: complex,
    duration: float,
    direction: TimeDirection = REAL_TIME,
    settings: IntegrationSettings = DEFAULT_SETTINGS,
) -> complex:
    """Point reached from z after flowing `duration` along direction (negative runs backward)."""
    if duration == 0:
        return complex(z)
    factor = direction.factor

    def rhs(t, y):
        w = factor * f.evaluate(_as_complex(y))
        return [w.real, w.imag]

    z = complex(z)
    sol = solve_ivp(rhs, (0.0, duration), [z.real, z.imag], method="RK45", rtol=settings.rtol, atol=settings.atol)
    if not sol.success:
        raise EvaluationError(f"flow from {z} over {duration} failed: {sol.message}")
    return _as_complex(sol.y[:, -1])


def propagate(
    f: HolomorphicFunction,
    z: complex,
    duration: float,
    settings: IntegrationSettings = DEFAULT_SETTINGS,
) -> tuple[complex, complex]:
    """Real-time flow map together with its complex derivative dz(t)/dz(0).

    The derivative w solves the variational equation ẇ = f'(z)·w, w(0) = 1.
    """
    f_prime = f.derivative(1)

    def rhs(t, y):
        z_t = complex(y[0], y[1])
        w = complex(y[2], y[3])
        dz = f.evaluate(z_t)
        dw = f_prime.evaluate(z_t) * w
        return [dz.real, dz.imag, dw.real, dw.imag]

    z = complex(z)
    if duration == 0:
        return z, 1 + 0j
    sol = solve_ivp(
        rhs, (0.0, duration), [z.real, z.imag, 1.0, 0.0], method="RK45", rtol=settings.rtol, atol=settings.atol
    )
    if not sol.success:
        raise EvaluationError(f"variational flow from {z} over {duration} failed: {sol.message}")
    end = sol.y[:, -1]
    return complex(end[0], end[1]), complex(end[2], end[3])
