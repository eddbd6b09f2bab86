import math

import numpy as np
import pytest
from numba import njit

from armtune.dynamics import RobotParams
from armtune.simulate import SimConfig


@pytest.fixture
def params():
    return RobotParams()


@pytest.fixture
def task():
    return SimConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@njit
def constant_error_plant(p, gains, qd, tlim, x, dx):
    """Stub plant that pins e = (1, 1): only the integrators move."""
    for i in range(4):
        dx[i] = 0.0
    dx[4] = 1.0
    dx[5] = 1.0
    dx[6] = 2.0


@njit
def zero_error_plant(p, gains, qd, tlim, x, dx):
    for i in range(7):
        dx[i] = 0.0


FREE_SWING = SimConfig(dt=1e-3, t_final=5.0, q0=(math.pi / 4, 0.0), qd=(0.0, 0.0))
