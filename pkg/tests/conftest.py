import numpy as np
import pytest

from ballrot.ballgrid import build_grid
from ballrot.eigenbasis import enumerate_modes
from ballrot.solver import build_bases


@pytest.fixture(scope="session")
def basis_all():
    return enumerate_modes("all", 4, 3, 1.0)


@pytest.fixture(scope="session")
def bases():
    return build_bases(4, 3, 1.0)


@pytest.fixture(scope="session")
def grid():
    return build_grid(1.0, 32, 24, 48)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
