import numpy as np
import pytest

import basinlearn as bl
from basinlearn.evaluation import ground_truth


@pytest.fixture(scope="session")
def domain():
    return bl.StateDomain(lower=[-8.0, -25.0], upper=[8.0, 25.0])


@pytest.fixture(scope="session")
def params():
    return bl.MagnetSystemParams()


@pytest.fixture(scope="session")
def sim_cfg():
    return bl.SimConfig()


@pytest.fixture(scope="session")
def attractors(params, domain):
    return bl.find_attractors(params, domain)


@pytest.fixture(scope="session")
def truth50(domain, params, sim_cfg):
    """Reference labels on the 50x50 pool grid (shared; ~2 s to build)."""
    return ground_truth(domain, 50, params, sim_cfg)


@pytest.fixture()
def oracle(params, sim_cfg, domain, attractors):
    return bl.SimulatedOracle(params, sim_cfg, domain, attractors)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)
