# testing/conftest.py

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from hom.model import HomFitParams  # noqa: E402
from spectral.grid import make_grid  # noqa: E402
from spectral.jsa import StateConfig  # noqa: E402

# bin spacing and width of the measured source, in rad/ps
BIN_DELTA = 2 * np.pi * 1.37
BIN_SIGMA = 2 * np.pi * 0.19


@pytest.fixture(scope="session")
def grid():
    return make_grid(1550.0, 36.0, 512)


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(1550.0, 36.0, 256)


@pytest.fixture(scope="session")
def state():
    return StateConfig()


@pytest.fixture
def unit_params():
    return HomFitParams(N=1.0, V=1.0, delta=BIN_DELTA, sigma=BIN_SIGMA, phi=0.0)
