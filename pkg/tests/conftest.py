import dataclasses

import pytest

import dremnet as dn


@pytest.fixture(scope="session")
def sec5():
    return dn.load_scenario("sec5")


@pytest.fixture(scope="session")
def sec5_noise_free(sec5):
    return dataclasses.replace(sec5, variances=(0.0,) * sec5.n)
