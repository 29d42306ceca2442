import numpy as np
import pytest

from dppfit import make_periodic_sobolev, make_sinc_pswf, make_sphere_sobolev


@pytest.fixture(scope="session")
def sobolev1():
    return make_periodic_sobolev(1, 2000)


@pytest.fixture(scope="session")
def sobolev1_small():
    return make_periodic_sobolev(1, 101)


@pytest.fixture(scope="session")
def sobolev2():
    return make_periodic_sobolev(2, 401)


@pytest.fixture(scope="session")
def sphere15():
    return make_sphere_sobolev(3, 1.5, L_max=12)


@pytest.fixture(scope="session")
def pswf():
    return make_sinc_pswf(2.0, 7.0, 128)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
