import dataclasses

import numpy as np
import pytest

from fas_uav_relay import load_config
from fas_uav_relay.utils import dbm_to_watts


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: million-trial Monte Carlo comparisons")


@pytest.fixture
def rural():
    """Bundled rural preset."""
    return load_config("rural")


@pytest.fixture
def urban():
    """Bundled urban preset."""
    return load_config("urban")


@pytest.fixture
def rural_validation(rural):
    """Rural setup of the simulation comparison: m=5, P_1=10 dBm, L=100."""
    return rural.replace(
        nakagami__m1=5,
        nakagami__m2=5,
        radio__p1=float(dbm_to_watts(10)),
        blocklength=100,
        fas__n_ports=2,
        fas__aperture=0.5,
    )


@pytest.fixture
def urban_validation(urban):
    """Urban setup of the simulation comparison: P_1=40 dBm, L=100."""
    return urban.replace(radio__p1=float(dbm_to_watts(40)), blocklength=100)


@pytest.fixture
def piecewise_mc():
    def make(config, trials=200_000, **kwargs):
        mc = dataclasses.replace(
            config.mc, trials=trials, q_model="piecewise", **kwargs
        )
        return dataclasses.replace(config, mc=mc)

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
