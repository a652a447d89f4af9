import numpy as np
import pytest

from specgal import OperatorSpec, build_spectrum


@pytest.fixture(scope="session")
def wave_spec():
    return OperatorSpec(family="damped_wave", m=1, alpha=7 / 12, rho=1.0, gamma=0.0, length=np.pi)


@pytest.fixture(scope="session")
def wave_spectrum(wave_spec):
    # mu_j = j^2 on (0, pi); block index 1 is the mu=4 mode
    return build_spectrum(wave_spec, 12)


@pytest.fixture(scope="session")
def heat_spec():
    return OperatorSpec(family="heat", m=1, beta=1.0, gamma=0.0, bc="periodic")


@pytest.fixture(scope="session")
def heat_spectrum(heat_spec):
    return build_spectrum(heat_spec, 16)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260816)
