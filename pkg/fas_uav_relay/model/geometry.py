"""
Geometry of the relay: slant ranges along the circular UAV trajectory, path
loss, elevation angles, the elevation dependent LoS probability and the
resulting per-hop average SNRs.

All functions broadcast over the heading ``theta``.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..exceptions import GeometryError
from ..utils import db_to_linear

log = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class LinkBudget:
    """
    Average SNRs of both hops for one link type, per heading.

    Attributes
    ----------
    gamma1_bar, gamma2_bar : array
        Average SNR of the BS-UAV and UAV-UE hop. ``gamma2_bar`` already contains
        the factor Σλ_n of the selected FAS branches.
    p_los_1, p_los_2 : array
        Probability that the hop is in the state this budget describes. Rural
        budgets carry probability one.
    """

    gamma1_bar: np.ndarray
    gamma2_bar: np.ndarray
    p_los_1: np.ndarray
    p_los_2: np.ndarray


def uav_position(placement, theta):
    """
    Returns the UAV coordinates with shape ``theta.shape + (3,)``.
    """
    theta = np.asarray(theta, dtype="float64")
    r = placement.uav_radius
    return np.stack(
        [
            r * np.cos(theta),
            r * np.sin(theta),
            np.full_like(theta, placement.uav_altitude),
        ],
        axis=-1,
    )


def slant_ranges(placement, theta):
    """
    Euclidean distances BS-UAV and UAV-UE.

    Parameters
    ----------
    placement : :py:class:`~fas_uav_relay.systemConfig.Placement`
    theta : float or array
        Heading on the trajectory in radians.

    Returns
    -------
    d1, d2 : array

    Raises
    ------
    GeometryError
        If the UAV coincides with the BS or the UE.
    """
    uav = uav_position(placement, theta)
    d1 = np.linalg.norm(uav - np.asarray(placement.bs), axis=-1)
    d2 = np.linalg.norm(uav - np.asarray(placement.ue), axis=-1)
    if np.any(d1 <= 0) or np.any(d2 <= 0):
        raise GeometryError("coincident nodes: the UAV position equals the BS or UE")
    return d1, d2


def fspl_beta(f_c, d):
    """
    Free-space channel gain β = (c / (4π f_c d))².
    """
    return (SPEED_OF_LIGHT / (4 * np.pi * f_c * np.asarray(d, dtype="float64"))) ** 2


def urban_beta(f_c, d, eta_k):
    """
    Free-space gain reduced by the excess loss ``eta_k`` in dB.
    """
    return fspl_beta(f_c, d) / db_to_linear(eta_k)


def elevation_deg(placement, theta, hop):
    """
    Elevation angle of the UAV as seen from the BS (``hop=1``) or the UE
    (``hop=2``), in degrees. Negative when the UAV flies below the node.
    """
    if hop not in (1, 2):
        raise ValueError(f"hop must be 1 or 2, got {hop}")
    d1, d2 = slant_ranges(placement, theta)
    if hop == 1:
        height, d = placement.uav_altitude - placement.bs[2], d1
    else:
        height, d = placement.uav_altitude - placement.ue[2], d2
    return np.degrees(np.arcsin(np.clip(height / d, -1.0, 1.0)))


def los_probability(phi, a, b):
    """
    Sigmoid LoS probability 1/(1 + a exp(-b(φ - a))) of an elevation ``phi``
    in degrees.
    """
    phi = np.asarray(phi, dtype="float64")
    return expit(b * (phi - a) - np.log(a))


def link_budget(config, corr, theta):
    """
    Average SNRs of both hops at the headings ``theta``.

    Parameters
    ----------
    config : :py:class:`~fas_uav_relay.systemConfig.SystemConfig`
    corr : :py:class:`~fas_uav_relay.model.fas_correlation.CorrelationModel`
        Supplies Σλ_n over the effective branches.
    theta : float or array

    Returns
    -------
    dict
        ``{"los": LinkBudget}`` for the rural scenario,
        ``{"los": LinkBudget, "nlos": LinkBudget}`` for the urban one. In the
        urban case ``p_los_i`` of the ``nlos`` budget is 1 - P_i^LoS.
    """
    radio = config.radio
    d1, d2 = slant_ranges(config.placement, theta)
    gain2 = radio.p2 * corr.lambda_sum / radio.noise_power
    gain1 = radio.p1 / radio.noise_power

    if not config.is_urban:
        one = np.ones_like(d1)
        return {
            "los": LinkBudget(
                gamma1_bar=gain1 * fspl_beta(radio.carrier_freq, d1),
                gamma2_bar=gain2 * fspl_beta(radio.carrier_freq, d2),
                p_los_1=one,
                p_los_2=one,
            )
        }

    urban = config.urban
    p1 = los_probability(elevation_deg(config.placement, theta, 1), urban.a, urban.b)
    p2 = los_probability(elevation_deg(config.placement, theta, 2), urban.a, urban.b)
    budgets = {}
    for link, eta, w1, w2 in (
        ("los", urban.eta_los, p1, p2),
        ("nlos", urban.eta_nlos, 1 - p1, 1 - p2),
    ):
        budgets[link] = LinkBudget(
            gamma1_bar=gain1 * urban_beta(radio.carrier_freq, d1, eta),
            gamma2_bar=gain2 * urban_beta(radio.carrier_freq, d2, eta),
            p_los_1=w1,
            p_los_2=w2,
        )
    log.debug(
        f"Urban budget: P_LoS hop 1 in [{np.min(p1):.4f}, {np.max(p1):.4f}], "
        f"hop 2 in [{np.min(p2):.4f}, {np.max(p2):.4f}]"
    )
    return budgets
