#
# Copyright (c) 2025, sepkit developers
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""
Winding numbers and orbit indices.

 Group 1: Polygons: canonical windings, turning numbers, on-curve points
 Group 2: Brute-force agreement on random star-shaped polygons
 Group 3: Orbit classification and index on the cosh fixture
"""

import math

import numpy as np
import pytest

from sepkit.exceptions import PointOnCurve
from sepkit.expressions import parse
from sepkit.flow import IntegrationSettings
from sepkit.orbits import (
    ClosedCurve,
    OrbitVerdict,
    classify_orbit,
    enclosing_center,
    orbit_index,
    tangent_winding,
    winding_number,
)
from tests.conftest import COSH, COSH_DOMAIN, LOWER_CENTER, UPPER_CENTER

PI = math.pi


def _circle(n: int, turns: int = 1, clockwise: bool = False) -> ClosedCurve:
    t = 2 * PI * np.arange(n) / n
    points = np.exp(1j * turns * t)
    return ClosedCurve(points[::-1] if clockwise else points)


def _is_left(a: complex, b: complex, p: complex) -> float:
    return (b.real - a.real) * (p.imag - a.imag) - (p.real - a.real) * (b.imag - a.imag)


def _crossing_winding(points: np.ndarray, p: complex) -> int:
    """Upward/downward edge crossings of the ray to the right of p."""
    count = 0
    for a, b in zip(points, np.roll(points, -1)):
        if a.imag <= p.imag:
            if b.imag > p.imag and _is_left(a, b, p) > 0:
                count += 1
        elif b.imag <= p.imag and _is_left(a, b, p) < 0:
            count -= 1
    return count


# ═══════════════════════════════════════════════════════════════════════════════
# Group 1: Polygons
# ═══════════════════════════════════════════════════════════════════════════════


def test_unit_circle_windings():
    circle = _circle(64)
    assert winding_number(circle, 0) == 1
    assert winding_number(circle.reversed(), 0) == -1
    assert winding_number(circle, 3 + 0j) == 0


def test_tangent_windings():
    assert tangent_winding(_circle(64)) == 1
    assert tangent_winding(_circle(64, clockwise=True)) == -1
    assert tangent_winding(_circle(128, turns=2)) == 2
    assert winding_number(_circle(128, turns=2), 0) == 2


def test_point_on_curve():
    circle = _circle(64)
    with pytest.raises(PointOnCurve):
        winding_number(circle, circle.points[5])
    with pytest.raises(PointOnCurve):
        winding_number(circle, 0.5 * (circle.points[0] + circle.points[1]))


def test_curve_validation():
    with pytest.raises(ValueError):
        ClosedCurve([0, 1])
    with pytest.raises(ValueError):
        ClosedCurve([0, 1, 1, 1j])
    with pytest.raises(ValueError):
        ClosedCurve([0, 1, 1j, 0])


def test_from_samples_drops_closing_point():
    samples = list(np.exp(2j * PI * np.arange(33) / 32))
    curve = ClosedCurve.from_samples(samples, closure_tol=1e-12)
    assert len(curve.points) == 32
    assert winding_number(curve, 0) == 1


def test_rotation_and_reversal_invariance(rng):
    circle = _circle(40)
    p = 0.3 - 0.2j
    for shift in rng.integers(1, 40, 5):
        assert winding_number(circle.rotated(int(shift)), p) == winding_number(circle, p)
    assert winding_number(circle.reversed(), p) == -winding_number(circle, p)
    assert tangent_winding(circle.reversed()) == -tangent_winding(circle)


# ═══════════════════════════════════════════════════════════════════════════════
# Group 2: Brute-force agreement
# ═══════════════════════════════════════════════════════════════════════════════


def test_winding_matches_crossing_count(rng):
    for _ in range(1000):
        n = int(rng.integers(3, 24))
        angles = np.sort(rng.uniform(0, 2 * PI, n))
        radii = rng.uniform(0.5, 1.5, n)
        points = radii * np.exp(1j * angles)
        if rng.random() < 0.5:
            points = points[::-1]
        curve = ClosedCurve(points)
        for p in rng.uniform(-2, 2, 4) + 1j * rng.uniform(-2, 2, 4):
            try:
                value = winding_number(curve, p)
            except PointOnCurve:
                continue
            assert value == _crossing_winding(curve.points, p)


# ═══════════════════════════════════════════════════════════════════════════════
# Group 3: Orbits
# ═══════════════════════════════════════════════════════════════════════════════


def test_classify_orbit_upper_center():
    result = classify_orbit(parse(COSH), complex(0.5, PI / 2 - 0.4), UPPER_CENTER)
    assert result.verdict is OrbitVerdict.PERIODIC
    assert result.index == 1
    assert result.period == pytest.approx(2 * PI, abs=1e-6)


def test_classify_orbit_lower_center():
    result = classify_orbit(parse(COSH), complex(0.5, -(PI / 2 - 0.4)), LOWER_CENTER)
    assert result.verdict is OrbitVerdict.PERIODIC
    assert result.index == -1


def test_classify_orbit_escaping():
    assert classify_orbit(parse("z"), 1, 0).verdict is OrbitVerdict.ESCAPING
    guarded = classify_orbit(parse("z"), 1, 0, domain=(-1, 1, -1, 1))
    assert guarded.verdict is OrbitVerdict.ESCAPING
    assert guarded.diagnostics["termination"] == "guard_exit"


def test_classify_orbit_start_at_center():
    with pytest.raises(ValueError):
        classify_orbit(parse(COSH), UPPER_CENTER, UPPER_CENTER)


@pytest.mark.parametrize(
    "z_start, center, index",
    [
        (complex(0.5, PI / 2 + 0.3), UPPER_CENTER, 1),
        (complex(0.5, -(PI / 2 + 0.3)), LOWER_CENTER, -1),
    ],
)
def test_orbit_index_cosh(z_start, center, index):
    result = orbit_index(parse(COSH), z_start, center)
    assert result.is_periodic
    assert result.index == index
    # convex orbits: turning number and winding about the center agree
    assert result.diagnostics["tangent_winding"] == index
    assert result.diagnostics["closure_residual"] < 1e-7


def test_orbit_index_rotation():
    result = orbit_index(parse("i*z"), 1, 0)
    assert result.is_periodic
    assert result.index == 1
    assert result.period == pytest.approx(2 * PI, abs=1e-7)


def test_orbit_index_requires_equilibrium():
    with pytest.raises(ValueError):
        orbit_index(parse(COSH), 2 + 0.5j, 0.5 + 1j)


def test_orbit_index_indeterminate_without_time():
    result = orbit_index(parse(COSH), complex(0.5, PI / 2 + 0.3), UPPER_CENTER, IntegrationSettings(t_max=0.5))
    assert result.verdict is OrbitVerdict.INDETERMINATE
    assert result.index is None


def test_enclosing_center_picks_the_right_center():
    f = parse(COSH)
    centers = [UPPER_CENTER, LOWER_CENTER]
    above = enclosing_center(f, 2 + 0.3j, centers)
    below = enclosing_center(f, 2 - 0.3j, centers)
    assert above.center == UPPER_CENTER and above.index == 1
    assert below.center == LOWER_CENTER and below.index == -1


def test_enclosing_center_on_separatrix():
    result = enclosing_center(parse(COSH), 2 + 0j, [UPPER_CENTER, LOWER_CENTER])
    assert result.verdict is OrbitVerdict.ESCAPING


def test_orbits_inside_domain_are_periodic(rng):
    f = parse(COSH)
    for y in rng.uniform(0.2, 1.4, 5):
        z = complex(rng.uniform(-1, 2), y)
        result = classify_orbit(f, z, UPPER_CENTER, domain=COSH_DOMAIN)
        assert result.is_periodic and result.index == 1
