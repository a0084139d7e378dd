import cmath
import math

import pytest

from quadray import QuadraticMap

GOLDEN_ROTATION = (math.sqrt(5.0) - 1.0) / 2.0
GOLDEN_LAMBDA = cmath.exp(2j * math.pi * GOLDEN_ROTATION)
GOLDEN_C = GOLDEN_LAMBDA / 2.0 - GOLDEN_LAMBDA ** 2 / 4.0
GOLDEN_ALPHA = GOLDEN_LAMBDA / 2.0


@pytest.fixture
def squaring():
    return QuadraticMap(0.0)


@pytest.fixture
def basilica():
    return QuadraticMap(-1.0)


@pytest.fixture
def chebyshev():
    return QuadraticMap(-2.0)


@pytest.fixture
def airplane_root():
    return QuadraticMap(-1.75)


@pytest.fixture
def golden_siegel():
    return QuadraticMap(GOLDEN_C)
