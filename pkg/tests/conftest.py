"""Shared fixtures: a canonical double-slit configuration whose fringe
period and envelope are cheap to resolve."""
import numpy as np
import pytest

from massfringe.experiments import free_zgrid, pattern_Zgrid
from massfringe.visibility import FringeModel
from massfringe.wavepacket import InitialState

K0 = 1000.0
L = 100.0
Z1, Z2 = 0.5, -0.5
SLIT = 0.03
Y_WIDTH = 0.05
G_ACC = 5e-6


@pytest.fixture(scope="session")
def ini():
    return InitialState.double_slit(Z1, Z2, SLIT, K0, y_width=Y_WIDTH)


@pytest.fixture(scope="session")
def fringe():
    return FringeModel.double_slit(K0, Z1, Z2, L)


@pytest.fixture(scope="session")
def zgrid(ini):
    return free_zgrid(ini, L)


def make_Zgrid(center, alpha, half=20.0):
    return pattern_Zgrid(center, half, alpha)
