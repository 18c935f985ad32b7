import numpy as np
import pytest

from skewmix.su2 import preset


@pytest.fixture(scope="session")
def lps5():
    return preset("lps5")


@pytest.fixture
def rng():
    return np.random.default_rng(1789)
