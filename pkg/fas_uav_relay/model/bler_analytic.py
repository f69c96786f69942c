"""
Closed-form average BLER of both hops under the piecewise-linear surrogate,
its high-SNR asymptotes, the urban LoS/NLoS mixture, end-to-end combining and
the average over the UAV heading.

Every hop BLER has the form χ∫_{max(ρ_L,0)}^{ρ_H} F(x) dx with F the CDF of the
hop SNR. Functions in this module broadcast over the rate parameter ϑ, so that
all headings of a trajectory average are evaluated in one call.
"""
import functools
import itertools
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaincc, gammaln

from .distributions import GammaHopModel, fas_cdf
from .fas_correlation import correlation_model
from .finite_blocklength import derive_fbl
from .geometry import link_budget
from .utils import chebyshev_roots, gamma_window, gauss_legendre
from ..exceptions import SubsetCapError

log = logging.getLogger(__name__)

SUBSET_CAP = 20
# above this many effective branches "auto" integrates numerically
AUTO_CLOSED_MAX = 4
METHODS = ("closed", "quadrature", "asymptotic", "auto")
OVERSHOOT_TOL = 1e-9


def _clamp(bler, what):
    bler = np.asarray(bler, dtype="float64")
    overshoot = np.max(np.maximum(bler - 1.0, -bler), initial=0.0)
    if overshoot > OVERSHOOT_TOL:
        log.debug(f"{what}: pre-clamp overshoot {overshoot:.3e}")
    return np.clip(bler, 0.0, 1.0)


def _limits(bler, vartheta):
    """Zero rate means a perfect channel, infinite rate a silent one."""
    bler = np.where(vartheta == 0, 0.0, bler)
    return np.where(np.isinf(vartheta), 1.0, bler)


def _safe_rate(vartheta):
    vartheta = np.asarray(vartheta, dtype="float64")
    return vartheta, np.where((vartheta == 0) | np.isinf(vartheta), 1.0, vartheta)


# ------------------------------------------------------------------------------ #
# First hop
# ------------------------------------------------------------------------------ #


def hop1_bler(fbl, model):
    """
    Average BLER of a single Nakagami-m branch,
    χ[x P(m,ϑx) - (m/ϑ) P(m+1,ϑx)] evaluated between max(ρ_L,0) and ρ_H.

    Parameters
    ----------
    fbl : :py:class:`~fas_uav_relay.model.finite_blocklength.FblParams`
    model : :py:class:`~fas_uav_relay.model.distributions.GammaHopModel`
        ``vartheta`` may be an array.

    Returns
    -------
    array
        Shape of ``model.vartheta``.
    """
    m = model.m
    vartheta, rate = _safe_rate(model.vartheta)
    lo, hi = fbl.lower, fbl.rho_h
    bler = fbl.chi * (
        hi * gammainc(m, rate * hi)
        - lo * gammainc(m, rate * lo)
        - m / rate * gamma_window(m + 1, rate * lo, rate * hi)
    )
    return _clamp(_limits(bler, vartheta), "hop 1")


def hop1_bler_asymptotic(fbl, model):
    """
    High-SNR series of :py:func:`hop1_bler`,
    χ(ρ_H^{m+1} - ρ_L^{m+1})/(m+1) · ϑ^m/m!. Diversity order m.
    """
    return hop2_bler_asymptotic(fbl, model.m, model.vartheta, [1.0])


# ------------------------------------------------------------------------------ #
# FAS hop, inclusion-exclusion over the effective branches
# ------------------------------------------------------------------------------ #


def g_helper(y, a, b):
    """
    Antiderivative helper 𝒢(y; a, b) = -(a!/b^{a+1}) e^{-by} Σ_{i≤a} (by)^i/i!,
    so that ∫ x^a e^{-bx} dx = 𝒢(y; a, b).
    """
    y = np.asarray(y, dtype="float64")
    return -np.exp(gammaln(a + 1) - (a + 1) * np.log(b)) * gammaincc(a + 1, b * y)


@functools.lru_cache(maxsize=256)
def _subset_template(m, lambdas):
    """
    Rate independent part of the expansion.

    For each subset S the product Π_{j∈S} Σ_{k<m} (r_j t)^k/k! is expanded in
    t = b_S x with r_j = (1/λ_j)/Σ_{i∈S}(1/λ_i) ≤ 1, which keeps all
    normalized coefficients d_a(S) below 1/a!.

    Returns
    -------
    sizes : np.ndarray
        |S| per subset.
    rates : np.ndarray
        Σ_{j∈S} 1/λ_j per subset, b_S = ϑ_2 · rates.
    normalized : tuple of np.ndarray
        d_a(S), a = 0..|S|(m-1), per subset.
    """
    inv = 1.0 / np.asarray(lambdas, dtype="float64")
    n = len(inv)
    k = np.arange(m)
    log_fact = gammaln(k + 1)
    sizes, rates, normalized = [], [], []
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            total = inv[list(subset)].sum()
            poly = np.ones(1)
            for j in subset:
                factor = np.exp(k * np.log(inv[j] / total) - log_fact)
                poly = np.convolve(poly, factor)
            sizes.append(size)
            rates.append(total)
            normalized.append(poly)
    return np.array(sizes), np.array(rates), tuple(normalized)


@dataclass(frozen=True)
class SubsetExpansion:
    """
    Inclusion-exclusion expansion of 1 - Π_n (1 - e^{-xϑ_2/λ_n} A_n(x)).

    Attributes
    ----------
    m : int
    vartheta2 : float or array
    lambdas : tuple
    sizes, rates, normalized
        See :py:func:`_subset_template`.
    """

    m: int
    vartheta2: object
    lambdas: tuple
    sizes: np.ndarray
    rates: np.ndarray
    normalized: tuple

    @property
    def b(self):
        """b_S = Σ_{j∈S} ϑ_2/λ_j, last axis runs over subsets."""
        vartheta2 = np.asarray(self.vartheta2, dtype="float64")
        return np.multiply.outer(vartheta2, self.rates)

    def coefficients(self, index):
        """
        Coefficients c_a(S) of the polynomial P_S(x) = Σ_a c_a x^a of subset
        number ``index`` at scalar ϑ_2.
        """
        b = float(self.vartheta2) * self.rates[index]
        d = self.normalized[index]
        return d * b ** np.arange(len(d))

    @property
    def n_subsets(self):
        return len(self.sizes)


def subset_expansion(m, vartheta2, lambdas, subset_cap=SUBSET_CAP):
    """
    Enumerates all non-empty subsets of the effective branches.

    Parameters
    ----------
    m : int
    vartheta2 : float or array
    lambdas : array
    subset_cap : int, default: 20

    Raises
    ------
    SubsetCapError
        If there are more than ``subset_cap`` branches.
    """
    lambdas = tuple(float(v) for v in np.atleast_1d(lambdas))
    if len(lambdas) > subset_cap:
        raise SubsetCapError(
            f"{len(lambdas)} branches exceed the subset cap of {subset_cap}, "
            f"use quadrature path"
        )
    sizes, rates, normalized = _subset_template(int(m), lambdas)
    return SubsetExpansion(
        m=int(m),
        vartheta2=vartheta2,
        lambdas=lambdas,
        sizes=sizes,
        rates=rates,
        normalized=normalized,
    )


@functools.lru_cache(maxsize=256)
def _flat_terms(m, lambdas):
    """Flattened (subset, degree, a!·d_a) triples of a template."""
    sizes, rates, normalized = _subset_template(m, lambdas)
    subset = np.concatenate([np.full(len(d), i) for i, d in enumerate(normalized)])
    degree = np.concatenate([np.arange(len(d)) for d in normalized])
    d = np.concatenate(normalized)
    with np.errstate(divide="ignore"):
        weight = np.where(d > 0, np.exp(gammaln(degree + 1) + np.log(d)), 0.0)
    sign = np.where(sizes[subset] % 2 == 0, 1.0, -1.0)
    return subset, degree, sign * weight, rates[subset]


def hop2_bler_closed(fbl, expansion):
    """
    Exact average BLER of the FAS hop,
    χ(ρ_H - ρ_L) + χ Σ_S (-1)^{|S|} Σ_a c_a(S)[𝒢(ρ_H; a, b_S) - 𝒢(ρ_L; a, b_S)].

    Each bracket is evaluated as a!/b^{a+1} times a difference of regularized
    incomplete gamma functions.

    Parameters
    ----------
    fbl : :py:class:`~fas_uav_relay.model.finite_blocklength.FblParams`
    expansion : :py:class:`SubsetExpansion`

    Returns
    -------
    array
        Shape of ``expansion.vartheta2``.
    """
    _, degree, weight, rates = _flat_terms(expansion.m, expansion.lambdas)
    vartheta, rate = _safe_rate(expansion.vartheta2)
    lo, hi = fbl.lower, fbl.rho_h
    b = np.multiply.outer(rate, rates)
    window = gamma_window(degree + 1, b * lo, b * hi)
    total = np.sum(weight * window / b, axis=-1)
    bler = fbl.chi * ((hi - lo) + total)
    return _clamp(_limits(bler, vartheta), "hop 2 closed form")


def hop2_bler_quadrature(fbl, m, vartheta2, lambdas, order=64, panels=2):
    """
    χ∫ F(x) dx of the FAS hop by composite Gauss-Legendre quadrature on
    [max(ρ_L, 0), ρ_H]. Scales to any number of branches.
    """
    vartheta, rate = _safe_rate(vartheta2)
    nodes, weights = gauss_legendre(fbl.lower, fbl.rho_h, order=order, panels=panels)
    cdf = fas_cdf(nodes, m, rate[..., None], lambdas)
    bler = fbl.chi * np.sum(weights * cdf, axis=-1)
    return _clamp(_limits(bler, vartheta), "hop 2 quadrature")


def hop2_bler_asymptotic(fbl, m, vartheta2, lambdas):
    """
    Leading term of the high-SNR expansion of the FAS hop,

    χ(ρ_H^{mN+1} - ρ_L^{mN+1})/(mN+1) · (ϑ_2^m/Γ(m+1))^N · Π_n λ_n^{-m},

    with N the number of effective branches. Diversity order m·N.
    """
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype="float64"))
    vartheta = np.asarray(vartheta2, dtype="float64")
    n = len(lambdas)
    k = m * n + 1
    lo, hi = fbl.lower, fbl.rho_h
    with np.errstate(divide="ignore"):
        log_bler = (
            np.log(fbl.chi * (hi ** k - lo ** k) / k)
            + n * (m * np.log(vartheta) - gammaln(m + 1))
            - m * np.sum(np.log(lambdas))
        )
    return np.minimum(np.exp(log_bler), 1.0)


def hop2_bler(fbl, m, vartheta2, lambdas, method="closed", subset_cap=SUBSET_CAP):
    """
    Average BLER of the FAS hop with one of the ``METHODS``.

    ``closed`` falls back to quadrature above ``subset_cap`` branches, ``auto``
    already above ``AUTO_CLOSED_MAX``.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got '{method}'")
    n = len(np.atleast_1d(lambdas))
    if method == "asymptotic":
        return hop2_bler_asymptotic(fbl, m, vartheta2, lambdas)
    if method == "auto":
        method = "closed" if n <= AUTO_CLOSED_MAX else "quadrature"
    if method == "closed" and n > subset_cap:
        log.warning(
            f"{n} effective branches exceed the subset cap {subset_cap}, "
            f"integrating numerically"
        )
        method = "quadrature"
    if method == "closed":
        return hop2_bler_closed(fbl, subset_expansion(m, vartheta2, lambdas))
    return hop2_bler_quadrature(fbl, m, vartheta2, lambdas)


# ------------------------------------------------------------------------------ #
# Combining
# ------------------------------------------------------------------------------ #


def urban_hop_mixture(bler_los, bler_nlos, p_los):
    """Expectation of the hop BLER over the link state."""
    return bler_los * p_los + bler_nlos * (1 - p_los)


def end_to_end_bler(e1, e2):
    """Decode-and-forward combining 1 - (1 - ε_1)(1 - ε_2)."""
    return e1 + e2 - e1 * e2


@dataclass(frozen=True)
class TrajectoryQuadrature:
    """
    Gauss-Chebyshev rule for the uniform average over the heading.

    With θ = πx + π, (1/2π)∫_0^{2π} f dθ = (1/2)∫_{-1}^{1} f √(1-x²)/√(1-x²) dx,
    which the M-point rule evaluates at the Chebyshev roots with weights
    proportional to √(1 - x_m²). The weights are normalized to sum to one so
    that constants are reproduced exactly.

    With ``literal=True`` the weights are (π/M)·(π/M)/√(1 - x_m²), the form
    that appears in the literature with a doubled constant. Kept to compare
    against published curves.
    """

    order: int
    chebyshev_roots: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    literal: bool = False

    @classmethod
    def gauss_chebyshev(cls, order, literal=False):
        if order < 1:
            raise ValueError(f"quadrature order must be positive, got {order}")
        x = chebyshev_roots(order)
        if literal:
            weights = (np.pi / order) ** 2 / np.sqrt(1 - x ** 2)
        else:
            weights = np.sqrt(1 - x ** 2)
            weights = weights / weights.sum()
        return cls(
            order=order,
            chebyshev_roots=x,
            nodes=np.pi * x + np.pi,
            weights=weights,
            literal=literal,
        )

    def average(self, values):
        """Weighted sum over the node axis (the last one)."""
        return np.sum(self.weights * values, axis=-1)


def trajectory_average(f, M, literal=False):
    """
    Average of ``f`` over a uniformly distributed heading.

    Parameters
    ----------
    f : callable
        Maps an array of headings in radians to an array of probabilities of
        the same shape.
    M : int
        Number of Gauss-Chebyshev nodes.
    literal : bool, default: False
        See :py:class:`TrajectoryQuadrature`.

    Returns
    -------
    float

    Notes
    -----
    The normalized weights make a single node return f(π) itself, not the
    (π/2)·f(π) of the unnormalized rule. The literal rule gives (π²)·f(π).
    """
    rule = TrajectoryQuadrature.gauss_chebyshev(M, literal=literal)
    values = np.broadcast_to(f(rule.nodes), rule.nodes.shape)
    return float(rule.average(values))


# ------------------------------------------------------------------------------ #
# Scenario pipeline
# ------------------------------------------------------------------------------ #


def hop_shapes(config):
    """(m_1, m_2) per link type."""
    if config.is_urban:
        return {
            "los": (config.urban.m_los, config.urban.m_los),
            "nlos": (config.urban.m_nlos, config.urban.m_nlos),
        }
    return {"los": (config.nakagami.m1, config.nakagami.m2)}


def _prepare(config, corr, fbl):
    if corr is None:
        corr = correlation_model(config.fas)
    if fbl is None:
        fbl = derive_fbl(config.payload_bits, config.blocklength)
    return corr, fbl


def hop1_mixture(config, fbl, budgets):
    shapes = hop_shapes(config)
    e1 = 0.0
    for link, budget in budgets.items():
        m1 = shapes[link][0]
        model = GammaHopModel.from_average_snr(m1, budget.gamma1_bar)
        e1 = e1 + budget.p_los_1 * hop1_bler(fbl, model)
    return e1


def hop_blers(config, corr, fbl, theta, method="closed"):
    """
    Average BLER of both hops at the headings ``theta``, mixed over the link
    states in the urban scenario.

    Parameters
    ----------
    config : :py:class:`~fas_uav_relay.systemConfig.SystemConfig`
    corr : :py:class:`~fas_uav_relay.model.fas_correlation.CorrelationModel`
    fbl : :py:class:`~fas_uav_relay.model.finite_blocklength.FblParams`
    theta : float or array
    method : str, default: "closed"
        Evaluation of the FAS hop, the first hop always uses its closed form.

    Returns
    -------
    e1, e2 : array
    """
    budgets = link_budget(config, corr, theta)
    shapes = hop_shapes(config)
    e1 = hop1_mixture(config, fbl, budgets)
    e2 = 0.0
    for link, budget in budgets.items():
        m2 = shapes[link][1]
        model = GammaHopModel.from_average_snr(m2, budget.gamma2_bar, corr.lambda_sum)
        bler = hop2_bler(fbl, m2, model.vartheta, corr.lambdas, method=method)
        e2 = e2 + budget.p_los_2 * bler
    return e1, e2


def heading_bler(config, corr, fbl, theta, method="closed"):
    """End-to-end BLER ε̄_T(θ)."""
    e1, e2 = hop_blers(config, corr, fbl, theta, method=method)
    return end_to_end_bler(e1, e2)


def average_bler(
    config, corr=None, fbl=None, method="closed", order=None, literal=None
):
    """
    Overall average BLER ε̄_O, the heading average of :py:func:`heading_bler`.

    Parameters
    ----------
    config : :py:class:`~fas_uav_relay.systemConfig.SystemConfig`
    corr, fbl : optional
        Derived from ``config`` if not given.
    method : str, default: "closed"
    order, literal : optional
        Override ``config.quadrature_order`` and ``config.literal_gcq``.

    Returns
    -------
    float
    """
    corr, fbl = _prepare(config, corr, fbl)
    order = config.quadrature_order if order is None else order
    literal = config.literal_gcq if literal is None else literal
    bler = trajectory_average(
        lambda theta: heading_bler(config, corr, fbl, theta, method=method),
        order,
        literal=literal,
    )
    log.debug(f"Average BLER ({method}) at P_2={config.radio.p2:.4g} W: {bler:.6e}")
    return bler


def asymptotic_average_bler(config, corr=None, fbl=None, order=None):
    """:py:func:`average_bler` with the high-SNR form of the FAS hop."""
    return average_bler(config, corr, fbl, method="asymptotic", order=order)


def error_floor(config, corr=None, fbl=None, order=None):
    """
    Limit of ε̄_O for P_2 → ∞: the heading average of the first-hop BLER.
    Independent of P_2 and of the antenna at the UE.
    """
    corr, fbl = _prepare(config, corr, fbl)
    order = config.quadrature_order if order is None else order

    def first_hop(theta):
        return hop1_mixture(config, fbl, link_budget(config, corr, theta))

    return trajectory_average(first_hop, order, literal=config.literal_gcq)

