"""
Normal approximation of the block error rate for short packets and its
piecewise-linear surrogate.

The surrogate replaces Q((C(γ) - R)/√(Z(γ)/L)) by a ramp that is one below
ρ_L, zero above ρ_H and linear with slope -χ in between. All averaged BLER
expressions of :py:mod:`.bler_analytic` are integrals over that ramp.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, erfcinv

log = logging.getLogger(__name__)

LOG2_E = np.log2(np.e)


@dataclass(frozen=True)
class FblParams:
    """
    Constants of the piecewise-linear approximation for ``payload_bits`` bits
    in ``blocklength`` channel uses.

    Attributes
    ----------
    rate : float
        R = B/L in bits per channel use.
    tau : float
        2^R - 1, the SNR at which C(γ) = R.
    chi : float
        Slope of the ramp, 1/√(2π(2^R - 1)/L).
    rho_l, rho_h : float
        τ ∓ 1/(2χ). ``rho_l`` may be negative at very low rates.
    """

    payload_bits: int
    blocklength: int
    rate: float
    tau: float
    chi: float
    rho_l: float
    rho_h: float

    @property
    def lower(self):
        """Lower integration limit, ρ_L clamped to the SNR support."""
        return max(self.rho_l, 0.0)


def derive_fbl(B, L):
    """
    Derives :py:class:`FblParams` from the payload and the blocklength.

    Parameters
    ----------
    B : int
        Payload in bits.
    L : int
        Blocklength in channel uses. The approximation drops a O(log2(L)/L)
        term, a warning is logged below 100.

    Returns
    -------
    :py:class:`FblParams`
    """
    if B <= 0 or L <= 0:
        raise ValueError(f"payload and blocklength must be positive, got B={B}, L={L}")
    if L < 100:
        log.warning(
            f"Blocklength L={L} is below 100, the normal approximation loses accuracy"
        )
    rate = B / L
    tau = 2.0 ** rate - 1.0
    chi = 1.0 / np.sqrt(2 * np.pi * tau / L)
    half = 1.0 / (2 * chi)
    fbl = FblParams(
        payload_bits=int(B),
        blocklength=int(L),
        rate=rate,
        tau=tau,
        chi=chi,
        rho_l=tau - half,
        rho_h=tau + half,
    )
    if fbl.rho_l < 0:
        log.warning(f"rho_L={fbl.rho_l:.4g} < 0, integrals start at zero SNR")
    log.debug(f"FBL constants: {fbl}")
    return fbl


def gaussian_q(x):
    """Gaussian tail probability Q(x)."""
    return 0.5 * erfc(np.asarray(x, dtype="float64") / np.sqrt(2))


def gaussian_q_inverse(p):
    """Inverse of :py:func:`gaussian_q`."""
    return np.sqrt(2) * erfcinv(2 * np.asarray(p, dtype="float64"))


def capacity(gamma):
    """Shannon capacity log2(1 + γ) in bits per channel use."""
    return np.log2(1 + np.asarray(gamma, dtype="float64"))


def dispersion(gamma):
    """Channel dispersion (1 - (1 + γ)^-2)(log2 e)²."""
    gamma = np.asarray(gamma, dtype="float64")
    return (1 - (1 + gamma) ** -2.0) * LOG2_E ** 2


def normal_approximation_rate(gamma, L, eps):
    """
    Achievable rate C(γ) - √(Z(γ)/L) Q⁻¹(ε) for an error probability ``eps``.
    """
    return capacity(gamma) - np.sqrt(dispersion(gamma) / L) * gaussian_q_inverse(eps)


def instantaneous_bler(gamma, fbl):
    """
    Block error probability at instantaneous SNR ``gamma`` with the exact
    Gaussian Q. Zero SNR yields one.

    Parameters
    ----------
    gamma : float or array
    fbl : :py:class:`FblParams`

    Returns
    -------
    array
    """
    gamma = np.asarray(gamma, dtype="float64")
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = (capacity(gamma) - fbl.rate) / np.sqrt(
            dispersion(gamma) / fbl.blocklength
        )
        bler = gaussian_q(arg)
    return np.where(gamma > 0, np.nan_to_num(bler, nan=0.0), 1.0)


def piecewise_q(gamma, fbl):
    """
    Piecewise-linear surrogate of :py:func:`instantaneous_bler`: 1 below ρ_L,
    0 above ρ_H and 1/2 - χ(γ - τ) in between.
    """
    gamma = np.asarray(gamma, dtype="float64")
    return np.clip(0.5 - fbl.chi * (gamma - fbl.tau), 0.0, 1.0)
