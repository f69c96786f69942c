"""
Distributions of the received SNR of both hops.

Nakagami-m amplitudes give Gamma distributed powers. With an integer shape the
CDF is the regularized lower incomplete gamma function P(m, xϑ), which is
what ``scipy.special.gammainc`` evaluates.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GammaHopModel:
    """
    Gamma distributed SNR with integer shape ``m`` and rate ``vartheta``.

    For hop 1 ϑ_1 = m_1/γ̄_1. For the FAS hop the per-branch rate is
    ϑ_2/λ_n with ϑ_2 = m_2 Σλ_n/γ̄_2.
    """

    m: int
    vartheta: float

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"Nakagami shape must be a positive integer, got {self.m}")
        if np.any(np.asarray(self.vartheta) < 0):
            raise ValueError("vartheta must be non-negative")

    @classmethod
    def from_average_snr(cls, m, gamma_bar, lambda_sum=1.0):
        """
        Rate parameter of an average SNR ``gamma_bar``. Zero SNR maps to an
        infinite rate.
        """
        gamma_bar = np.asarray(gamma_bar, dtype="float64")
        with np.errstate(divide="ignore"):
            vartheta = m * lambda_sum / gamma_bar
        return cls(m=m, vartheta=vartheta)


def _scaled(x, rate):
    x = np.asarray(x, dtype="float64")
    with np.errstate(invalid="ignore"):
        z = x * rate
    return np.where(x > 0, z, 0.0)


def gamma_cdf(x, model):
    """
    CDF 1 - e^{-xϑ} Σ_{k<m} (xϑ)^k/k! of the hop SNR.

    Parameters
    ----------
    x : float or array
        SNR, non-negative.
    model : :py:class:`GammaHopModel`
    """
    return gammainc(model.m, _scaled(x, model.vartheta))


def fas_cdf(x, m, vartheta2, lambdas):
    """
    CDF of the strongest effective branch, Π_n P(m, xϑ_2/λ_n).

    Parameters
    ----------
    x : float or array
    m : int
    vartheta2 : float
    lambdas : array
        Eigenvalues of the effective branches, all positive.

    Returns
    -------
    array
        Shape of ``x``.
    """
    x = np.asarray(x, dtype="float64")
    lambdas = np.asarray(lambdas, dtype="float64")
    if np.any(lambdas <= 0):
        raise ValueError("branch eigenvalues must be positive")
    cdf = np.ones(x.shape)
    for lam in lambdas:
        cdf = cdf * gammainc(m, _scaled(x, vartheta2 / lam))
    return cdf
