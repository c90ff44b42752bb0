import math

import pytest

from spde_blowup import DomainSpec, ModelParams, SimGrid, solve_eigenpair


@pytest.fixture(scope="session")
def pi_interval():
    return DomainSpec("interval", (math.pi,))


@pytest.fixture(scope="session")
def pi_spectral(pi_interval):
    return solve_eigenpair(pi_interval)


@pytest.fixture(scope="session")
def equal_params(pi_interval):
    # m = n = p = q = 1, k1 = k2 = 1: rho1 = rho2 = 1, T1 = T2 = 1/3.
    return ModelParams(
        m=1.0, n=1.0, p=1.0, q=1.0, k1=1.0, k2=1.0, C1=1.0, C2=1.0,
        domain=pi_interval,
    )


@pytest.fixture(scope="session")
def coarse_grid():
    return SimGrid(dt=1e-3, horizon=5.0)
