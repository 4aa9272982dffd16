#
# Copyright (c) 2025, sepkit developers
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""
Equilibrium location and classification.

 Group 1: Classification of f'(z₀), with and without time rotation
 Group 2: Newton seeding over a rectangle
"""

import math

import numpy as np
import pytest

from sepkit.equilibria import (
    EquilibriumType,
    classify,
    classify_under_rotation,
    find_zeros,
    newton,
)
from sepkit.expressions import parse
from tests.conftest import COSH, COSH_DOMAIN

PI = math.pi


# ═══════════════════════════════════════════════════════════════════════════════
# Group 1: Classification
# ═══════════════════════════════════════════════════════════════════════════════


def test_classify_examples():
    node = classify(1)
    assert node.type is EquilibriumType.NODE and node.stable is False

    center = classify(1j)
    assert center.type is EquilibriumType.CENTER and center.orientation == 1
    assert str(center) == "center orientation +1"

    focus = classify(-1 - 1j)
    assert focus.type is EquilibriumType.FOCUS
    assert focus.stable is True and focus.orientation == -1

    assert classify(0).type is EquilibriumType.DEGENERATE
    assert classify(-2).stable is True


@pytest.mark.parametrize(
    "f_prime, theta, kind, stable, orientation",
    [
        (1, PI / 2, EquilibriumType.CENTER, None, 1),
        (1j, PI / 2, EquilibriumType.NODE, True, None),
        (1, PI, EquilibriumType.NODE, True, None),
        (1j, 0.0, EquilibriumType.CENTER, None, 1),
    ],
)
def test_classify_under_rotation_examples(f_prime, theta, kind, stable, orientation):
    result = classify_under_rotation(f_prime, theta)
    assert result.type is kind
    assert result.stable is stable
    assert result.orientation == orientation


def test_rotation_by_zero_is_plain_classification(rng):
    for value in rng.normal(size=50) + 1j * rng.normal(size=50):
        assert classify_under_rotation(value, 0.0) == classify(value)


def test_quarter_turn_swaps_nodes_and_centers():
    for f_prime in (1, 1j, -1, 2 - 1j, np.exp(0.3j)):
        for theta in np.linspace(0, 2 * PI, 360, endpoint=False):
            now = classify_under_rotation(f_prime, theta).type
            later = classify_under_rotation(f_prime, theta + PI / 2).type
            if now is EquilibriumType.CENTER:
                assert later is EquilibriumType.NODE
            elif now is EquilibriumType.NODE:
                assert later is EquilibriumType.CENTER
            else:
                assert later is EquilibriumType.FOCUS


@pytest.mark.parametrize("k", [-2, -1, 0, 1])
def test_cosh_center_orientation_alternates(k):
    f = parse(COSH)
    z0 = complex(0.5, (k + 0.5) * PI)
    kind = classify(f.derivative(1).evaluate(z0))
    assert kind.type is EquilibriumType.CENTER
    assert kind.orientation == (-1) ** k


# ═══════════════════════════════════════════════════════════════════════════════
# Group 2: Newton seeding
# ═══════════════════════════════════════════════════════════════════════════════


def test_cosh_equilibria():
    found = find_zeros(parse(COSH), COSH_DOMAIN)
    assert len(found) == 2
    lower, upper = sorted(found, key=lambda eq: eq.z0.imag)
    assert abs(upper.z0 - complex(0.5, PI / 2)) < 1e-12
    assert abs(lower.z0 - complex(0.5, -PI / 2)) < 1e-12
    for eq in found:
        assert eq.residual < 1e-12
        assert eq.kind.type is EquilibriumType.CENTER
    assert upper.kind.orientation == 1
    assert lower.kind.orientation == -1


def test_linear_node():
    (eq,) = find_zeros(parse("z"), (-1, 1, -1, 1), grid_n=10)
    assert abs(eq.z0) < 1e-12
    assert eq.kind.type is EquilibriumType.NODE
    assert eq.kind.stable is False


def test_quadratic_centers():
    found = sorted(find_zeros(parse("z^2 + 1"), (-2, 2, -2, 2)), key=lambda eq: eq.z0.imag)
    assert [eq.z0 for eq in found] == pytest.approx([-1j, 1j], abs=1e-12)
    assert [eq.kind.orientation for eq in found] == [-1, 1]
    assert all(eq.kind.type is EquilibriumType.CENTER for eq in found)


def test_double_root_is_degenerate():
    (eq,) = find_zeros(parse("z^2"), (-1, 1, -1, 1))
    assert abs(eq.z0) < 1e-8
    assert eq.kind.type is EquilibriumType.DEGENERATE


def test_roots_on_the_boundary_are_excluded():
    # ±3π/2 lie exactly on the edge of the cosh domain
    found = find_zeros(parse(COSH), (-10.0, 10.0, -1.5 * PI, 1.5 * PI))
    assert all(abs(eq.z0.imag) < PI for eq in found)


def test_newton_polish_is_stable():
    f = parse(COSH)
    for eq in find_zeros(f, COSH_DOMAIN):
        assert abs(newton(f, eq.z0) - eq.z0) < 1e-14


def test_no_equilibria():
    assert find_zeros(parse("exp(z)"), (-2, 2, -2, 2)) == []


@pytest.mark.parametrize("grid_n, domain", [(1, (-1, 1, -1, 1)), (10, (1, 1, -1, 1)), (10, (-1, 1, 2, -2))])
def test_find_zeros_validation(grid_n, domain):
    with pytest.raises(ValueError):
        find_zeros(parse("z"), domain, grid_n=grid_n)
