#
# Copyright (c) 2025, sepkit developers
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""
Separatrix localization on the cosh fixture, whose separatrices are the lines Im z = kπ.

 Group 1: Index-product test
 Group 2: Index scan by bisection
 Group 3: Zero-derivative contour
 Group 4: Boundary value problem
 Group 5: Curvature of imaginary-time trajectories
"""

import math

import numpy as np
import pytest

from sepkit.exceptions import BracketInvalid, EmptyContour, FlatCurvature, NoBracket, ZeroVelocity
from sepkit.expressions import parse
from sepkit.flow import IMAGINARY_TIME, REAL_TIME, IntegrationSettings, flow_map
from sepkit.separatrix import (
    BvpProblem,
    Method,
    bvp_separatrix_point,
    curvature_at,
    curvature_max_scan,
    index_product_test,
    index_scan,
    oriented_bvp_problem,
    zdp_curve,
)
from tests.conftest import COSH, UPPER_CENTER, make_center

PI = math.pi
PRECISE = IntegrationSettings(rtol=1e-12, atol=1e-12)


@pytest.fixture(scope="module")
def second_strip(cosh_f, cosh_centers):
    """Centers on either side of the separatrix Im z = π."""
    return cosh_centers[0], make_center(cosh_f, complex(0.5, 1.5 * PI))


def _distance_to_lines(z: complex) -> float:
    nearest_k = round(z.imag / PI)
    return min(abs(z.real - 0.5), abs(z.imag - nearest_k * PI))


def _menger_curvature(a: complex, b: complex, c: complex) -> float:
    """Signed curvature of the circle through three points, positive for a left turn."""
    cross = (np.conj(b - a) * (c - b)).imag
    return 2 * cross / (abs(b - a) * abs(c - b) * abs(c - a))


# ═══════════════════════════════════════════════════════════════════════════════
# Group 1: Index-product test
# ═══════════════════════════════════════════════════════════════════════════════


def test_index_product_across_the_separatrix(cosh_f, cosh_centers):
    check = index_product_test(cosh_f, 2, 1j, 0.3, cosh_centers)
    assert check.result == -1
    assert check.side_0 == pytest.approx(2 + 0.3j)
    assert check.side_1 == pytest.approx(2 - 0.3j)
    assert [orbit.index for orbit in check.orbits] == [1, -1]


def test_index_product_inside_one_region(cosh_f, cosh_centers):
    upper = cosh_centers[0]
    check = index_product_test(cosh_f, complex(0.5, PI / 2 + 0.1), 1j, 0.05, (upper, upper))
    assert check.result == 1


def test_index_product_indeterminate(cosh_f, cosh_centers):
    check = index_product_test(cosh_f, 9.9, 1j, 0.1, cosh_centers, IntegrationSettings(t_max=0.5))
    assert check.is_indeterminate
    assert check.result is None


def test_index_product_validation(cosh_f, cosh_centers):
    with pytest.raises(ValueError):
        index_product_test(cosh_f, 2, 1j, 0.0, cosh_centers)
    with pytest.raises(ValueError):
        index_product_test(cosh_f, 2, 2j, 0.1, cosh_centers)
    node = make_center(parse("z"), 0)
    with pytest.raises(ValueError):
        index_product_test(parse("z"), 1, 1j, 0.1, (node, node))


def test_interior_points_never_flag_a_separatrix(cosh_f, cosh_centers, rng):
    upper = cosh_centers[0]
    results = []
    for _ in range(50):
        z = complex(rng.uniform(-1, 2), rng.uniform(0.3, PI - 0.3))
        results.append(index_product_test(cosh_f, z, 1j, 0.05, (upper, upper)).result)
    assert all(result in (1, None) for result in results)
    assert results.count(1) > 0


# ═══════════════════════════════════════════════════════════════════════════════
# Group 2: Index scan
# ═══════════════════════════════════════════════════════════════════════════════


def test_index_scan_finds_real_axis(cosh_f, cosh_centers):
    (candidate,) = index_scan(cosh_f, (2 - 0.8j, 2 + 0.8j), cosh_centers, 0.1)
    assert candidate.method is Method.INDEX_SCAN
    assert candidate.converged
    assert abs(candidate.z.imag) < 1e-6
    assert candidate.z.real == pytest.approx(2.0)
    assert candidate.diagnostics["index_product"] == -1
    assert {candidate.diagnostics["index_below"], candidate.diagnostics["index_above"]} == {1, -1}


def test_index_scan_second_separatrix(cosh_f, second_strip):
    (candidate,) = index_scan(cosh_f, (2 + 2j, 2 + 4j), second_strip, 0.1)
    assert candidate.converged
    assert abs(candidate.z.imag - PI) < 1e-6


@pytest.mark.parametrize("epsilon", [0.1, 0.2, 0.4])
def test_index_scan_result_survives_reprobing(cosh_f, cosh_centers, epsilon):
    (candidate,) = index_scan(cosh_f, (2 - 0.8j, 2 + 0.8j), cosh_centers, 0.1)
    assert index_product_test(cosh_f, candidate.z, 1j, epsilon, cosh_centers).result == -1


def test_index_scan_without_bracket(cosh_f, cosh_centers):
    with pytest.raises(NoBracket):
        index_scan(cosh_f, (2 + 0.3j, 2 + 1.2j), cosh_centers, 0.1)


def test_index_scan_validation(cosh_f, cosh_centers):
    with pytest.raises(ValueError):
        index_scan(cosh_f, (2j, 2j), cosh_centers, 0.1)
    with pytest.raises(ValueError):
        index_scan(cosh_f, (2 - 1j, 2 + 1j), cosh_centers, 0.1, samples=1)


# ═══════════════════════════════════════════════════════════════════════════════
# Group 3: Zero-derivative contour
# ═══════════════════════════════════════════════════════════════════════════════


def test_zdp_cosh_lines(cosh_f):
    polylines = zdp_curve(cosh_f, (-3, 4, -4, 4), grid_n=200)
    points = np.concatenate([p.points for p in polylines])
    residuals = np.concatenate([p.residuals for p in polylines])
    assert np.all(residuals < 1e-12)

    saddles = [complex(0.5, k * PI) for k in (-1, 0, 1)]
    for z in points:
        if min(abs(z - s) for s in saddles) > 0.01:
            assert _distance_to_lines(complex(z)) < 1e-8, z

    # Re z = 0.5 and Im z = -π, 0, π all show up
    assert np.any(np.abs(points.real - 0.5) < 1e-8)
    for k in (-1, 0, 1):
        assert np.any(np.abs(points.imag - k * PI) < 1e-8)


def test_zdp_candidates(cosh_f):
    polylines = zdp_curve(cosh_f, (-3, 4, -1, 1), grid_n=50)
    candidates = [c for p in polylines for c in p.candidates()]
    assert candidates
    assert all(c.method is Method.ZDP and c.converged and c.residual < 1e-12 for c in candidates)


def test_zdp_linear_field():
    polylines = zdp_curve(parse("z"), (-1, 1, -1, 1), grid_n=10)
    points = np.concatenate([p.points for p in polylines])
    assert np.all(np.abs(points.imag) < 1e-12)
    assert points.real.min() < -0.8 and points.real.max() > 0.8


def test_zdp_real_part():
    polylines = zdp_curve(parse("z"), (-1, 1, -1, 1), grid_n=10, part="real")
    points = np.concatenate([p.points for p in polylines])
    assert np.all(np.abs(points.real) < 1e-12)


def test_zdp_constant_field_is_empty():
    with pytest.raises(EmptyContour):
        zdp_curve(parse("i"), (-1, 1, -1, 1))


def test_zdp_validation(cosh_f):
    with pytest.raises(ValueError):
        zdp_curve(cosh_f, (-1, 1, -1, 1), grid_n=7)
    with pytest.raises(ValueError):
        zdp_curve(cosh_f, (-1, 1, -1, 1), part="both")


# ═══════════════════════════════════════════════════════════════════════════════
# Group 4: Boundary value problem
# ═══════════════════════════════════════════════════════════════════════════════


def test_bvp_unit_horizon(cosh_f):
    candidate = bvp_separatrix_point(cosh_f, BvpProblem(2.0, t1=1.0))
    assert candidate.method is Method.BVP
    assert candidate.converged
    assert abs(candidate.z.imag) < 1e-4
    assert candidate.residual < 1e-10
    assert abs(candidate.diagnostics["optimality"]) < 1e-5
    assert candidate.z.real == pytest.approx(2.0, abs=1e-10)


@pytest.mark.parametrize("x_star, t1", [(-2, -0.1), (-1, -0.1), (0, -0.1), (1, 0.1), (2, 0.1)])
def test_bvp_along_the_real_axis(cosh_f, x_star, t1):
    candidate = bvp_separatrix_point(cosh_f, BvpProblem(float(x_star), t1=t1))
    assert candidate.converged
    assert abs(candidate.z.imag) < 1e-4


@pytest.mark.parametrize("x_star, t1", [(-2, -0.1), (-1, -0.1), (0, -0.1), (1, 0.1), (2, 0.1)])
def test_oriented_problem_picks_the_calm_side(cosh_f, x_star, t1):
    problem = oriented_bvp_problem(cosh_f, float(x_star))
    assert problem.t0 == 0.0
    assert problem.t1 == pytest.approx(t1)


def test_bvp_second_separatrix(cosh_f):
    problem = oriented_bvp_problem(cosh_f, 2.0, bracket=(2.5, 3.8))
    candidate = bvp_separatrix_point(cosh_f, problem)
    assert abs(candidate.z.imag - PI) < 1e-4


def test_bvp_minimum_on_bracket_edge():
    with pytest.raises(BracketInvalid):
        bvp_separatrix_point(parse("z"), BvpProblem(1.0, t1=0.1, bracket=(0.5, 1.5)))


def test_bvp_problem_validation():
    with pytest.raises(ValueError):
        BvpProblem(1.0, t0=0.5, t1=0.5)
    with pytest.raises(ValueError):
        BvpProblem(1.0, bracket=(1.0, 1.0))
    assert BvpProblem(1.0, t0=0.2, t1=-0.3).duration == pytest.approx(-0.5)


# ═══════════════════════════════════════════════════════════════════════════════
# Group 5: Curvature
# ═══════════════════════════════════════════════════════════════════════════════


def test_curvature_examples():
    assert curvature_at(parse("i*z"), 1, REAL_TIME) == pytest.approx(1.0)
    assert curvature_at(parse("i*z"), 2, REAL_TIME) == pytest.approx(0.5)
    # ż = z runs along rays, ż = iz around circles
    assert curvature_at(parse("z"), 1 + 1j, REAL_TIME) == 0
    assert curvature_at(parse("z"), 1 + 1j) == pytest.approx(1 / math.sqrt(2))


def test_curvature_at_equilibrium():
    with pytest.raises(ZeroVelocity):
        curvature_at(parse(COSH), UPPER_CENTER)


def test_curvature_is_geometric(rng):
    f, scaled = parse(COSH), parse("2.5*cosh(z-0.5)")
    for z in rng.uniform(-2, 3, 20) + 1j * rng.uniform(-3, 3, 20):
        kappa = curvature_at(f, z)
        assert curvature_at(scaled, z) == pytest.approx(kappa, rel=1e-12, abs=1e-15)
        assert curvature_at(f, z, IMAGINARY_TIME.reversed()) == pytest.approx(-kappa, rel=1e-12, abs=1e-15)


def test_curvature_matches_three_point_estimate(cosh_f):
    z, h = complex(1.2, 0.7), 3e-3
    a, b, c = (flow_map(cosh_f, z, t, IMAGINARY_TIME, PRECISE) for t in (-h, 0.0, h))
    kappa = curvature_at(cosh_f, z)
    assert kappa == pytest.approx(0.5386, abs=1e-3)
    assert _menger_curvature(a, b, c) == pytest.approx(kappa, rel=1e-4)


def test_curvature_vanishes_on_center_line(cosh_f):
    assert abs(curvature_at(cosh_f, complex(0.5, 0.7))) < 1e-12


@pytest.mark.parametrize(
    "z0, line",
    [
        (2 + 0.5j, 0.0),
        (1.5 - 0.8j, 0.0),
        (3 + 1.2j, 0.0),
        (-1 + 0.3j, 0.0),
        (1 - 0.6j, 0.0),
        (-1 + 2.6j, PI),
        (2 + 3.6j, PI),
        (1.5 + 2.4j, PI),
        (-1.5 + 3.8j, PI),
        (2.5 + 2.8j, PI),
    ],
)
def test_curvature_maximum_on_separatrix(cosh_f, short_settings, z0, line):
    candidate = curvature_max_scan(cosh_f, z0, short_settings)
    assert candidate.method is Method.CURVATURE
    assert abs(candidate.z.imag - line) < 1e-2
    assert candidate.diagnostics["curvature"] > 0


def test_curvature_scan_on_straight_paths():
    with pytest.raises(FlatCurvature):
        curvature_max_scan(parse("i*z"), 1, IntegrationSettings(t_max=30.0))
