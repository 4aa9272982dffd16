#
# Copyright (c) 2025, sepkit developers
#
# SPDX-License-Identifier: BSD 2-Clause License
#

import math

import numpy as np
import pytest

from sepkit.equilibria import Equilibrium, classify, find_zeros
from sepkit.expressions import parse
from sepkit.flow import IntegrationSettings

PI = math.pi

# cosh(z - 0.5): centers at 0.5 + i(k + 1/2)π, separatrices Im z = kπ
COSH = "cosh(z-0.5)"
COSH_DOMAIN = (-10.0, 10.0, -1.5 * PI, 1.5 * PI)
UPPER_CENTER = complex(0.5, PI / 2)
LOWER_CENTER = complex(0.5, -PI / 2)


def make_center(f, z0: complex) -> Equilibrium:
    fp = f.derivative(1).evaluate(z0)
    return Equilibrium(z0, fp, classify(fp), abs(f.evaluate(z0)))


@pytest.fixture(scope="session")
def cosh_f():
    return parse(COSH)


@pytest.fixture(scope="session")
def cosh_centers(cosh_f):
    """(upper, lower) centers of the cosh fixture, as found by find_zeros."""
    found = find_zeros(cosh_f, COSH_DOMAIN)
    by_imag = sorted(found, key=lambda eq: -eq.z0.imag)
    return by_imag[0], by_imag[1]


@pytest.fixture
def short_settings():
    return IntegrationSettings(t_max=30.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20250101)
