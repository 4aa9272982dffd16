#
# Copyright (c) 2025, sepkit developers
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Equilibria of ż = f(z): location by Newton seeding and classification.

A simple zero z₀ is classified by f'(z₀): real means node, imaginary means
center, anything else a focus. Rotating time by θ multiplies f'(z₀) by e^{iθ},
so imaginary time swaps nodes and centers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from loguru import logger

from sepkit.exceptions import EvaluationError
from sepkit.expressions import HolomorphicFunction
from sepkit.flow import TimeDirection

DEFAULT_TOL_CLASS = 1e-9


class EquilibriumType(str, Enum):
    NODE = "node"
    CENTER = "center"
    FOCUS = "focus"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class EquilibriumKind:
    type: EquilibriumType
    stable: bool | None = None
    orientation: int | None = None

    def __str__(self):
        parts = [self.type.value]
        if self.stable is not None:
            parts.append("stable" if self.stable else "unstable")
        if self.orientation is not None:
            parts.append(f"orientation {self.orientation:+d}")
        return " ".join(parts)


@dataclass(frozen=True)
class Equilibrium:
    z0: complex
    f_prime: complex
    kind: EquilibriumKind
    residual: float


def classify(f_prime_value: complex, tol_class: float = DEFAULT_TOL_CLASS) -> EquilibriumKind:
    a, b = f_prime_value.real, f_prime_value.imag
    m = abs(f_prime_value)
    if m < tol_class:
        return EquilibriumKind(EquilibriumType.DEGENERATE)
    if abs(b) <= tol_class * m:
        return EquilibriumKind(EquilibriumType.NODE, stable=a < 0)
    orientation = 1 if b > 0 else -1
    if abs(a) <= tol_class * m:
        return EquilibriumKind(EquilibriumType.CENTER, orientation=orientation)
    return EquilibriumKind(EquilibriumType.FOCUS, stable=a < 0, orientation=orientation)


def classify_under_rotation(
    f_prime_value: complex, theta: float, tol_class: float = DEFAULT_TOL_CLASS
) -> EquilibriumKind:
    return classify(TimeDirection(theta).factor * complex(f_prime_value), tol_class)


def _inside(z: complex, domain: Sequence[float], margin: float) -> bool:
    x_min, x_max, y_min, y_max = domain
    return x_min + margin < z.real < x_max - margin and y_min + margin < z.imag < y_max - margin


def newton(
    f: HolomorphicFunction, z: complex, tol: float = 4e-15, max_iter: int = 100
) -> complex | None:
    """Scalar Newton iteration z ← z - f(z)/f'(z); None when it does not settle."""
    f_prime = f.derivative(1)
    for _ in range(max_iter):
        value = f.evaluate(z)
        if value == 0:
            return z
        d = f_prime.evaluate(z)
        if d == 0:
            return None
        step = value / d
        z -= step
        if abs(step) <= tol * max(1.0, abs(z)):
            return z
    return None


def find_zeros(
    f: HolomorphicFunction,
    domain: Sequence[float],
    grid_n: int = 40,
    zero_tol: float = 1e-10,
    tol_class: float = DEFAULT_TOL_CLASS,
    max_iter: int = 100,
) -> list[Equilibrium]:
    """Newton from every node of a grid_n × grid_n grid over the domain rectangle.

    Converged roots strictly inside the domain are merged within
    1e-8·(domain diagonal) and classified.
    """
    x_min, x_max, y_min, y_max = domain
    if grid_n < 2:
        raise ValueError(f"grid_n must be at least 2, got {grid_n}")
    if not (x_min < x_max and y_min < y_max):
        raise ValueError(f"degenerate domain {domain}")
    merge_tol = 1e-8 * math.hypot(x_max - x_min, y_max - y_min)
    f_prime = f.derivative(1)

    xs = np.linspace(x_min, x_max, grid_n)
    ys = np.linspace(y_min, y_max, grid_n)
    z = (xs[None, :] + 1j * ys[:, None]).ravel()

    # vectorized sweep first, scalar polish below
    active = np.ones(z.shape, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(max_iter):
            step = f.evaluate_grid(z[active]) / f_prime.evaluate_grid(z[active])
            z[active] = z[active] - step
            done = ~np.isfinite(step) | (np.abs(step) <= 1e-13 * np.maximum(1.0, np.abs(z[active])))
            active[np.flatnonzero(active)[done]] = False
            if not active.any():
                break

    roots = []
    for seed in z[np.isfinite(z)]:
        try:
            root = newton(f, complex(seed), max_iter=max_iter)
        except (EvaluationError, ValueError) as e:
            logger.debug(f"Dropping Newton seed {seed}: {e}")
            continue
        if root is None or not _inside(root, domain, merge_tol):
            continue
        if abs(f.evaluate(root)) < zero_tol:
            roots.append(root)

    roots.sort(key=lambda r: (r.real, r.imag))
    merged: list[complex] = []
    for root in roots:
        if all(abs(root - kept) > merge_tol for kept in merged):
            merged.append(root)

    equilibria = []
    for root in merged:
        fp = f_prime.evaluate(root)
        kind = EquilibriumKind(EquilibriumType.DEGENERATE) if abs(fp) < zero_tol else classify(fp, tol_class)
        equilibria.append(Equilibrium(root, fp, kind, abs(f.evaluate(root))))
    logger.info(f"Found {len(equilibria)} equilibria of {f} in {list(domain)}")
    return equilibria
