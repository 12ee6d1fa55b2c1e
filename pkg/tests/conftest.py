import numpy as np
import pytest

from latticeym.groups import GroupSpec
from latticeym.lattice import LatticeSpec

SO2 = GroupSpec("SO", 2)
SO3 = GroupSpec("SO", 3)
SO5 = GroupSpec("SO", 5)
SU2 = GroupSpec("SU", 2)
SU3 = GroupSpec("SU", 3)


@pytest.fixture
def rng():
    return np.random.default_rng(20260822)


@pytest.fixture
def small_lattice():
    return LatticeSpec(2, 2)


@pytest.fixture
def lattice_2d4():
    return LatticeSpec(2, 4)
