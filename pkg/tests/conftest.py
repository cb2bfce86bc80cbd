import numpy as np
import pytest

from instances import planted_socp, toy_lp_problem


@pytest.fixture(scope="session")
def toy():
    return toy_lp_problem()


@pytest.fixture(scope="session")
def socp():
    return planted_socp()


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
