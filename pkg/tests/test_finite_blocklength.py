import logging

import numpy as np
import pytest

from fas_uav_relay.model.finite_blocklength import (
    capacity,
    derive_fbl,
    dispersion,
    gaussian_q,
    gaussian_q_inverse,
    instantaneous_bler,
    normal_approximation_rate,
    piecewise_q,
)


def test_derived_constants():
    fbl = derive_fbl(80, 100)
    assert fbl.rate == pytest.approx(0.8)
    assert fbl.tau == pytest.approx(0.741101, abs=1e-6)
    assert fbl.chi == pytest.approx(4.63405, rel=1e-4)
    assert fbl.rho_l == pytest.approx(0.633203, abs=1e-4)
    assert fbl.rho_h == pytest.approx(0.849000, abs=1e-4)
    assert fbl.lower == fbl.rho_l


def test_unit_rate():
    fbl = derive_fbl(200, 200)
    assert fbl.rate == 1.0
    assert fbl.tau == 1.0


@pytest.mark.parametrize(
    "B, L", [(80, 100), (80, 200), (80, 500), (16, 1000), (300, 100)]
)
def test_ramp_spans_unit_probability(B, L):
    fbl = derive_fbl(B, L)
    assert fbl.chi * (fbl.rho_h - fbl.rho_l) == pytest.approx(1.0, abs=1e-14)
    assert fbl.rho_l < fbl.tau < fbl.rho_h


def test_negative_lower_limit_is_clamped(caplog):
    with caplog.at_level(logging.WARNING):
        fbl = derive_fbl(1, 1000)
    assert fbl.rho_l < 0
    assert fbl.lower == 0.0
    assert "rho_L" in caplog.text


def test_short_block_warns(caplog):
    with caplog.at_level(logging.WARNING):
        derive_fbl(40, 50)
    assert "below 100" in caplog.text


@pytest.mark.parametrize("B, L", [(0, 100), (80, 0), (-1, 100)])
def test_rejects_non_positive(B, L):
    with pytest.raises(ValueError):
        derive_fbl(B, L)


def test_gaussian_q():
    assert gaussian_q(0.0) == 0.5
    assert gaussian_q(1.6) == pytest.approx(0.0547993, abs=1e-7)
    x = np.linspace(-5, 5, 21)
    np.testing.assert_allclose(gaussian_q_inverse(gaussian_q(x)), x, atol=1e-9)


def test_capacity_and_dispersion():
    assert capacity(1.0) == 1.0
    assert dispersion(0.0) == 0.0
    assert dispersion(1.0) == pytest.approx(0.75 * np.log2(np.e) ** 2, rel=1e-12)


def test_normal_approximation_rate():
    assert normal_approximation_rate(1.0, 100, 0.5) == pytest.approx(1.0, abs=1e-12)
    assert normal_approximation_rate(1.0, 100, 1e-3) < 1.0


def test_instantaneous_bler():
    fbl = derive_fbl(80, 100)
    assert instantaneous_bler(fbl.tau, fbl) == pytest.approx(0.5, abs=1e-12)
    assert instantaneous_bler(1.0, fbl) == pytest.approx(0.05469, abs=1e-4)
    assert instantaneous_bler(0.0, fbl) == 1.0
    assert instantaneous_bler(1e12, fbl) < 1e-12

    gamma = np.linspace(0, 5, 501)
    bler = instantaneous_bler(gamma, fbl)
    assert np.all(np.diff(bler) <= 0)
    assert np.all((bler >= 0) & (bler <= 1))


def test_normal_approximation_inverts_bler():
    fbl = derive_fbl(80, 200)
    gamma = 0.6
    eps = instantaneous_bler(gamma, fbl)
    assert normal_approximation_rate(gamma, 200, eps) == pytest.approx(
        fbl.rate, abs=1e-9
    )


def test_piecewise_q():
    fbl = derive_fbl(80, 100)
    assert piecewise_q(fbl.tau, fbl) == pytest.approx(0.5, abs=1e-12)
    assert piecewise_q(fbl.rho_l, fbl) == pytest.approx(1.0, abs=1e-12)
    assert piecewise_q(fbl.rho_h, fbl) == pytest.approx(0.0, abs=1e-12)
    assert piecewise_q(0.7, fbl) == pytest.approx(0.69046, abs=1e-4)
    assert piecewise_q(0.0, fbl) == 1.0
    assert piecewise_q(10.0, fbl) == 0.0


def test_piecewise_q_continuous_and_monotone():
    fbl = derive_fbl(80, 200)
    gamma = np.linspace(0, 2, 20001)
    values = piecewise_q(gamma, fbl)
    assert np.all(np.diff(values) <= 0)
    assert np.max(np.abs(np.diff(values))) <= fbl.chi * (gamma[1] - gamma[0]) + 1e-12


@pytest.mark.parametrize("L", [100, 200, 500])
def test_piecewise_close_to_exact(L):
    fbl = derive_fbl(80, L)
    gamma = np.linspace(0, 4 * fbl.tau, 2001)
    gap = np.abs(piecewise_q(gamma, fbl) - instantaneous_bler(gamma, fbl))
    assert np.max(gap) <= 0.3
