import numpy as np
import pytest
from scipy import stats

from fas_uav_relay.model.distributions import GammaHopModel, fas_cdf, gamma_cdf


def test_rayleigh_cdf():
    model = GammaHopModel(m=1, vartheta=0.5)
    x = np.linspace(0, 10, 11)
    np.testing.assert_allclose(gamma_cdf(x, model), 1 - np.exp(-0.5 * x), atol=1e-15)


def test_gamma_cdf_values():
    model = GammaHopModel(m=2, vartheta=1.0)
    assert gamma_cdf(1.0, model) == pytest.approx(1 - 2 / np.e, abs=1e-12)
    assert gamma_cdf(0.0, model) == 0.0
    assert gamma_cdf(1e6, model) == 1.0


@pytest.mark.parametrize("m", [1, 3, 7])
def test_gamma_cdf_matches_scipy(m):
    model = GammaHopModel(m=m, vartheta=2.5)
    x = np.linspace(0, 8, 33)
    np.testing.assert_allclose(
        gamma_cdf(x, model), stats.gamma(m, scale=1 / 2.5).cdf(x), atol=1e-13
    )


def test_from_average_snr():
    model = GammaHopModel.from_average_snr(5, 10.0)
    assert model.vartheta == pytest.approx(0.5)
    model = GammaHopModel.from_average_snr(2, 4.0, lambda_sum=2.0)
    assert model.vartheta == pytest.approx(1.0)
    assert np.isinf(GammaHopModel.from_average_snr(2, 0.0).vartheta)


@pytest.mark.parametrize("m, vartheta", [(0, 1.0), (1.5, 1.0), (2, -1.0)])
def test_invalid_model(m, vartheta):
    with pytest.raises(ValueError):
        GammaHopModel(m=m, vartheta=vartheta)


def test_fas_cdf_single_branch():
    x = np.linspace(0, 3, 31)
    np.testing.assert_allclose(
        fas_cdf(x, 3, 2.0, [1.0]), gamma_cdf(x, GammaHopModel(3, 2.0)), atol=1e-15
    )


def test_fas_cdf_two_rayleigh_branches():
    assert fas_cdf(1.0, 1, 1.0, [1.0, 1.0]) == pytest.approx(
        (1 - np.exp(-1)) ** 2, abs=1e-12
    )


def test_adding_a_branch_lowers_the_cdf():
    x = np.linspace(0.1, 2, 20)
    two = fas_cdf(x, 2, 1.0, [1.3, 0.7])
    three = fas_cdf(x, 2, 1.0, [1.3, 0.7, 0.5])
    assert np.all(three < two)


def test_fas_cdf_broadcasts_rates():
    x = np.linspace(0.1, 1, 5)
    rates = np.array([0.5, 1.0, 2.0])[:, None]
    cdf = fas_cdf(x, 2, rates, [1.2, 0.8])
    assert cdf.shape == (3, 5)
    np.testing.assert_allclose(cdf[1], fas_cdf(x, 2, 1.0, [1.2, 0.8]), atol=1e-15)


def test_fas_cdf_rejects_zero_eigenvalue():
    with pytest.raises(ValueError):
        fas_cdf(1.0, 1, 1.0, [1.0, 0.0])
