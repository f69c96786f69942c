import dataclasses

import numpy as np
import pytest

from fas_uav_relay.model import bler_analytic as ba
from fas_uav_relay.model.fas_correlation import correlation_model
from fas_uav_relay.model.finite_blocklength import derive_fbl
from fas_uav_relay.simulation import (
    McEstimate,
    mc_end_to_end,
    mc_hop1_bler,
    mc_hop2_bler,
)
from fas_uav_relay.simulation.montecarlo import draw_nakagami_power
from fas_uav_relay.systemConfig import UrbanExcess
from fas_uav_relay.utils import dbm_to_watts

SIGMAS = 4


def test_nakagami_power_moments(rng):
    power = draw_nakagami_power(5, rng, size=1_000_000)
    assert np.mean(power) == pytest.approx(1.0, abs=2e-3)
    assert np.var(power) == pytest.approx(0.2, abs=3e-3)


def test_rayleigh_power_moments(rng):
    power = draw_nakagami_power(1, rng, size=1_000_000)
    assert np.mean(power) == pytest.approx(1.0, abs=5e-3)
    assert np.var(power) == pytest.approx(1.0, abs=2e-2)


def test_nakagami_power_broadcasts_shapes(rng):
    power = draw_nakagami_power(np.array([1, 5, 7]), rng)
    assert power.shape == (3,)
    assert np.all(power > 0)


def test_deviation():
    estimate = McEstimate(mean=0.1, std_error=0.01, trials_used=100)
    assert estimate.deviation(0.13) == pytest.approx(3.0)
    assert McEstimate(1.0, 0.0, 10).deviation(1.0) == 0.0
    assert McEstimate(1.0, 0.0, 10).deviation(0.9) == np.inf


def test_reproducible_and_thread_independent(rural_validation, piecewise_mc):
    config = piecewise_mc(rural_validation, trials=50_000, chunk_size=8192)
    config = config.with_value("radio.p2", float(dbm_to_watts(3)))
    first = mc_end_to_end(config)
    assert mc_end_to_end(config) == first
    threaded = mc_end_to_end(config, mc=dataclasses.replace(config.mc, workers=3))
    assert threaded == first
    other = mc_end_to_end(config, mc=dataclasses.replace(config.mc, seed=1))
    assert other.mean != first.mean
    assert first.trials_used == 50_000


def test_silent_hop_always_fails(rural, piecewise_mc):
    config = piecewise_mc(rural, trials=1000).with_value("radio.p2", 1e-300)
    estimate = mc_hop2_bler(config)
    assert estimate.mean == 1.0
    assert estimate.std_error == 0.0


def test_exact_q_silent_hop(rural):
    config = rural.replace(radio__p2=1e-300, mc__trials=1000, mc__q_model="exact")
    assert mc_hop2_bler(config).mean == 1.0


def test_hop1_against_closed_form(rural_validation, piecewise_mc):
    config = piecewise_mc(rural_validation, trials=200_000)
    config = config.with_value("radio.p1", float(dbm_to_watts(0)))
    corr = correlation_model(config.fas)
    fbl = derive_fbl(config.payload_bits, config.blocklength)
    estimate = mc_hop1_bler(config, corr, fbl)
    analytic = ba.trajectory_average(
        lambda t: ba.hop_blers(config, corr, fbl, t)[0], 64
    )
    assert estimate.deviation(analytic) <= SIGMAS


def test_hop2_at_fixed_heading(rural_validation, piecewise_mc):
    config = piecewise_mc(rural_validation, trials=200_000, headings=0.0)
    config = config.with_value("radio.p2", float(dbm_to_watts(3)))
    corr = correlation_model(config.fas)
    fbl = derive_fbl(config.payload_bits, config.blocklength)
    estimate = mc_hop2_bler(config, corr, fbl)
    _, analytic = ba.hop_blers(config, corr, fbl, 0.0)
    assert estimate.deviation(float(analytic)) <= SIGMAS


@pytest.mark.parametrize("p2_dbm", [-6.0, 0.0, 6.0])
def test_end_to_end_urban(urban_validation, piecewise_mc, p2_dbm):
    config = piecewise_mc(urban_validation, trials=200_000)
    config = config.with_value("radio.p2", float(dbm_to_watts(p2_dbm)))
    estimate = mc_end_to_end(config)
    assert estimate.deviation(ba.average_bler(config)) <= SIGMAS


def test_urban_with_certain_los_matches_rural(rural_validation, piecewise_mc):
    config = piecewise_mc(rural_validation, trials=200_000)
    config = config.with_value("radio.p2", float(dbm_to_watts(3)))
    certain_los = UrbanExcess(eta_los=0.0, eta_nlos=23.0, a=1e-6, b=20.0, m_los=5)
    urbanized = dataclasses.replace(config, scenario="urban", urban=certain_los)
    estimate = mc_end_to_end(urbanized)
    assert estimate.deviation(ba.average_bler(config)) <= SIGMAS


def test_sweep_is_monotone(rural_validation, piecewise_mc):
    config = piecewise_mc(rural_validation, trials=100_000)
    estimates = [
        mc_end_to_end(config.with_value("radio.p2", float(dbm_to_watts(p))))
        for p in (0.0, 2.0, 4.0, 6.0)
    ]
    for a, b in zip(estimates, estimates[1:]):
        assert b.mean <= a.mean + 3 * (a.std_error + b.std_error)


def test_physical_ports_runs(rural_validation, piecewise_mc):
    config = piecewise_mc(rural_validation, trials=20_000, mode="physical_ports")
    config = config.replace(fas__n_ports=4, radio__p2=float(dbm_to_watts(3)))
    estimate = mc_hop2_bler(config)
    assert 0.0 <= estimate.mean <= 1.0
    assert estimate.std_error >= 0.0


@pytest.mark.slow
@pytest.mark.parametrize("scenario", ["rural_validation", "urban_validation"])
def test_closed_form_within_standard_errors(scenario, request, piecewise_mc):
    config = piecewise_mc(request.getfixturevalue(scenario), trials=1_000_000)
    checked = 0
    for p2_dbm in np.linspace(-10.0, 20.0, 9):
        point = config.with_value("radio.p2", float(dbm_to_watts(p2_dbm)))
        analytic = ba.average_bler(point, order=64)
        if not 1e-4 <= analytic <= 0.999:
            continue
        checked += 1
        assert mc_end_to_end(point).deviation(analytic) <= SIGMAS
    assert checked >= 2


@pytest.mark.parametrize("p2_dbm", [-2.5, 5.0])
def test_exact_q_separates_from_the_closed_form(rural_validation, p2_dbm):
    # the closed form integrates the piecewise surrogate, exact Q per packet
    # lands a few hundredths away, far outside the sampling error
    config = rural_validation.replace(
        radio__p2=float(dbm_to_watts(p2_dbm)), mc__trials=200_000, mc__q_model="exact"
    )
    analytic = ba.average_bler(config, order=64)
    estimate = mc_end_to_end(config)
    assert estimate.deviation(analytic) > SIGMAS
    assert estimate.mean == pytest.approx(analytic, abs=0.06)
