import numpy as np
import pytest

from fas_uav_relay.exceptions import GeometryError
from fas_uav_relay.model.fas_correlation import correlation_model
from fas_uav_relay.model.geometry import (
    elevation_deg,
    fspl_beta,
    link_budget,
    los_probability,
    slant_ranges,
    urban_beta,
)
from fas_uav_relay.systemConfig import Placement
from fas_uav_relay.utils import db_to_linear, linear_to_db


def test_slant_ranges_at_zero_heading(rural):
    d1, d2 = slant_ranges(rural.placement, 0.0)
    assert d1 == pytest.approx(np.sqrt(950 ** 2 + 60 ** 2), rel=1e-12)
    assert d2 == pytest.approx(np.sqrt(1050 ** 2 + 1000 ** 2 + 100 ** 2), rel=1e-12)


def test_slant_ranges_vary_along_trajectory(rural):
    d1_0, _ = slant_ranges(rural.placement, 0.0)
    d1_pi, _ = slant_ranges(rural.placement, np.pi)
    assert d1_pi > d1_0


def test_slant_ranges_periodic(rural):
    theta = np.linspace(0, 2 * np.pi, 7)
    d1, d2 = slant_ranges(rural.placement, theta)
    d1_shift, d2_shift = slant_ranges(rural.placement, theta + 2 * np.pi)
    np.testing.assert_allclose(d1, d1_shift, rtol=1e-12)
    np.testing.assert_allclose(d2, d2_shift, rtol=1e-12)


def test_coincident_nodes():
    placement = Placement(
        bs=(1000, 0, 40), ue=(50, 0, 0), uav_radius=50, uav_altitude=0
    )
    with pytest.raises(GeometryError, match="coincident nodes"):
        slant_ranges(placement, 0.0)


def test_fspl_reference_value():
    loss_db = -10 * np.log10(fspl_beta(2.5e9, 1000.0))
    assert loss_db == pytest.approx(100.41, abs=0.01)


def test_fspl_inverse_square():
    assert fspl_beta(2.5e9, 2000.0) / fspl_beta(2.5e9, 1000.0) == pytest.approx(
        0.25, rel=1e-12
    )


def test_urban_beta_excess_loss():
    assert urban_beta(2.5e9, 500.0, 0.0) == pytest.approx(fspl_beta(2.5e9, 500.0))
    assert urban_beta(2.5e9, 500.0, 10.0) == pytest.approx(
        0.1 * fspl_beta(2.5e9, 500.0), rel=1e-12
    )
    ratio = urban_beta(2.5e9, 500.0, 1.6) / urban_beta(2.5e9, 500.0, 23.0)
    assert ratio == pytest.approx(10 ** 2.14, rel=1e-12)


def test_elevation(rural):
    assert elevation_deg(rural.placement, 0.0, 1) == pytest.approx(3.614, abs=1e-3)

    level = Placement(bs=(1000, 0, 40), ue=(50, 0, 0), uav_radius=50, uav_altitude=40)
    assert elevation_deg(level, 0.0, 1) == pytest.approx(0.0, abs=1e-12)

    overhead = Placement(
        bs=(1000, 0, 40), ue=(50, 0, 0), uav_radius=50, uav_altitude=100
    )
    assert elevation_deg(overhead, 0.0, 2) == pytest.approx(90.0, abs=1e-9)


def test_elevation_rejects_unknown_hop(rural):
    with pytest.raises(ValueError):
        elevation_deg(rural.placement, 0.0, 3)


def test_los_probability():
    assert los_probability(90.0, 12.08, 0.11) == pytest.approx(0.997716, abs=1e-5)
    assert los_probability(12.08, 12.08, 0.11) == pytest.approx(1 / 13.08, rel=1e-12)
    phi = np.linspace(-90, 90, 181)
    p = los_probability(phi, 12.08, 0.11)
    assert np.all(np.diff(p) > 0)
    assert np.all((p > 0) & (p < 1))
    assert los_probability(1e4, 12.08, 0.11) == pytest.approx(1.0)
    assert los_probability(-1e4, 12.08, 0.11) == pytest.approx(0.0, abs=1e-300)


def test_rural_budget_scales_with_power(rural):
    corr = correlation_model(rural.fas)
    base = link_budget(rural, corr, 0.0)["los"]
    doubled = link_budget(rural.replace(radio__p2=2 * rural.radio.p2), corr, 0.0)
    assert doubled["los"].gamma2_bar == pytest.approx(2 * base.gamma2_bar, rel=1e-12)
    assert doubled["los"].gamma1_bar == pytest.approx(base.gamma1_bar, rel=1e-12)
    assert base.p_los_1 == 1.0 and base.p_los_2 == 1.0


def test_rural_budget_single_port(rural):
    config = rural.with_value("fas.n_ports", 1)
    corr = correlation_model(config.fas)
    budget = link_budget(config, corr, 0.0)["los"]
    _, d2 = slant_ranges(config.placement, 0.0)
    expected = config.radio.p2 * fspl_beta(2.5e9, d2) / config.radio.noise_power
    assert budget.gamma2_bar == pytest.approx(expected, rel=1e-12)


def test_urban_budget(urban):
    corr = correlation_model(urban.fas)
    theta = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    budgets = link_budget(urban, corr, theta)
    assert set(budgets) == {"los", "nlos"}
    los, nlos = budgets["los"], budgets["nlos"]
    np.testing.assert_allclose(los.p_los_1 + nlos.p_los_1, 1.0, rtol=1e-12)
    np.testing.assert_allclose(los.p_los_2 + nlos.p_los_2, 1.0, rtol=1e-12)
    np.testing.assert_allclose(
        los.gamma2_bar / nlos.gamma2_bar, 10 ** 2.14, rtol=1e-12
    )


def test_urban_altitude_trends(urban):
    corr = correlation_model(urban.fas)
    p_los, gains = [], []
    for z in (100.0, 200.0, 400.0, 800.0):
        budget = link_budget(urban.with_value("placement.uav_altitude", z), corr, 0.0)
        p_los.append(float(budget["los"].p_los_2))
        gains.append(float(budget["los"].gamma2_bar))
    # higher UAV: better line of sight, longer links
    assert np.all(np.diff(p_los) > 0)
    assert np.all(np.diff(gains) < 0)


def test_decibel_helpers():
    assert db_to_linear(23.0) == pytest.approx(10 ** 2.3, rel=1e-12)
    assert linear_to_db(db_to_linear(1.6)) == pytest.approx(1.6, rel=1e-12)
    assert urban_beta(2.5e9, 300.0, 23.0) == pytest.approx(
        fspl_beta(2.5e9, 300.0) / db_to_linear(23.0), rel=1e-12
    )
