"""
Seeded Monte Carlo estimates of the hop and end-to-end BLERs.

Trials are split into chunks of ``McConfig.chunk_size``. Chunk ``i`` draws from
the ``i``-th child of ``SeedSequence(seed)``, so an estimate depends on the seed
and the chunk size but not on the number of worker threads. Chunk statistics
are merged in chunk order.
"""
import logging
from dataclasses import dataclass
from multiprocessing.pool import ThreadPool

import numpy as np
from tqdm.auto import tqdm

from ..model.fas_correlation import correlation_model
from ..model.finite_blocklength import derive_fbl, instantaneous_bler, piecewise_q
from ..model.geometry import link_budget
from ..model.bler_analytic import hop_shapes
from ..utils import progress_disabled

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class McEstimate:
    """
    Sample mean of per-trial error probabilities.

    Attributes
    ----------
    mean : float
    std_error : float
        Sample standard deviation over √trials.
    trials_used : int
    """

    mean: float
    std_error: float
    trials_used: int

    def deviation(self, reference):
        """|reference - mean| in units of the standard error."""
        if self.std_error == 0:
            return 0.0 if reference == self.mean else np.inf
        return abs(reference - self.mean) / self.std_error


def draw_nakagami_power(m, rng, size=None):
    """
    Power |g|² of a Nakagami-m amplitude with unit mean, Gamma(m, 1/m).

    Parameters
    ----------
    m : int or array
        Shape, broadcast against ``size``.
    rng : np.random.Generator
    size : int or tuple, optional
    """
    m = np.asarray(m, dtype="float64")
    return rng.gamma(m, 1.0 / m, size=size)


# ------------------------------------------------------------------------------ #
# Per-trial channel synthesis
# ------------------------------------------------------------------------------ #


def _headings(mc, rng, size):
    if mc.headings == "uniform":
        return rng.uniform(0.0, 2 * np.pi, size=size)
    return np.full(size, float(mc.headings))


def _link_states(config, budgets, rng, size, hop):
    """
    Average SNR and Nakagami shape per trial. Urban trials draw the link state
    of the hop from its LoS probability.
    """
    shapes = hop_shapes(config)
    index = hop - 1
    gamma_bar = "gamma1_bar" if hop == 1 else "gamma2_bar"
    p_los = "p_los_1" if hop == 1 else "p_los_2"
    los = budgets["los"]
    if not config.is_urban:
        return getattr(los, gamma_bar), np.full(size, shapes["los"][index])
    nlos = budgets["nlos"]
    is_los = rng.random(size) < getattr(los, p_los)
    snr = np.where(is_los, getattr(los, gamma_bar), getattr(nlos, gamma_bar))
    shape = np.where(is_los, shapes["los"][index], shapes["nlos"][index])
    return snr, shape


def _strongest_branch(corr, shape, rng, size, mode):
    """
    Normalized power max_n |h_n|² / Σλ_n of the selected port.
    """
    if mode == "analytical_model":
        lambdas = corr.lambdas
        power = draw_nakagami_power(shape[:, None], rng, size=(size, len(lambdas)))
        return np.max(lambdas * power, axis=-1) / corr.lambda_sum

    # physical ports, h = U Λ^{1/2} g with Nakagami amplitudes and uniform phases
    n = corr.n_ports
    amplitude = np.sqrt(draw_nakagami_power(shape[:, None], rng, size=(size, n)))
    g = amplitude * np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=(size, n)))
    mixing = corr.eigenvectors * np.sqrt(corr.eigenvalues)
    h = g @ mixing.T
    return np.max(np.abs(h) ** 2, axis=-1) / corr.lambda_sum


def _chunk_errors(config, corr, fbl, mc, rng, size, target):
    """
    Per-trial error probabilities of one chunk.

    Parameters
    ----------
    target : str
        ``hop1``, ``hop2`` or ``end_to_end``.
    """
    error = instantaneous_bler if mc.q_model == "exact" else piecewise_q
    theta = _headings(mc, rng, size)
    budgets = link_budget(config, corr, theta)

    e1 = e2 = None
    if target in ("hop1", "end_to_end"):
        snr1, m1 = _link_states(config, budgets, rng, size, hop=1)
        e1 = error(snr1 * draw_nakagami_power(m1, rng), fbl)
    if target in ("hop2", "end_to_end"):
        snr2, m2 = _link_states(config, budgets, rng, size, hop=2)
        e2 = error(snr2 * _strongest_branch(corr, m2, rng, size, mc.mode), fbl)

    if target == "hop1":
        return e1
    if target == "hop2":
        return e2
    return e1 + (1 - e1) * e2


# ------------------------------------------------------------------------------ #
# Chunked estimation
# ------------------------------------------------------------------------------ #


def _merge(stats):
    """Merges (count, mean, M2) triples in the given order."""
    count, mean, m2 = 0, 0.0, 0.0
    for n_b, mean_b, m2_b in stats:
        total = count + n_b
        delta = mean_b - mean
        mean = mean + delta * n_b / total
        m2 = m2 + m2_b + delta ** 2 * count * n_b / total
        count = total
    return count, mean, m2


def _estimate(config, corr, fbl, mc, target):
    if corr is None:
        corr = correlation_model(config.fas)
    if fbl is None:
        fbl = derive_fbl(config.payload_bits, config.blocklength)
    mc = config.mc if mc is None else mc

    n_chunks = -(-mc.trials // mc.chunk_size)
    seeds = np.random.SeedSequence(mc.seed).spawn(n_chunks)
    sizes = [min(mc.chunk_size, mc.trials - i * mc.chunk_size) for i in range(n_chunks)]

    def run_chunk(i):
        rng = np.random.default_rng(seeds[i])
        errors = _chunk_errors(config, corr, fbl, mc, rng, sizes[i], target)
        mean = float(np.mean(errors))
        return sizes[i], mean, float(np.sum((errors - mean) ** 2))

    progress = dict(
        total=n_chunks, desc=f"MC {target}", leave=False, disable=progress_disabled()
    )
    if mc.workers > 1:
        with ThreadPool(mc.workers) as pool:
            stats = list(tqdm(pool.imap(run_chunk, range(n_chunks)), **progress))
    else:
        stats = [run_chunk(i) for i in tqdm(range(n_chunks), **progress)]

    count, mean, m2 = _merge(stats)
    std = np.sqrt(m2 / (count - 1)) if count > 1 else 0.0
    estimate = McEstimate(
        mean=float(np.clip(mean, 0.0, 1.0)),
        std_error=float(std / np.sqrt(count)),
        trials_used=int(count),
    )
    log.debug(f"MC {target} ({mc.mode}, {mc.q_model}): {estimate}")
    return estimate


def mc_hop1_bler(config, corr=None, fbl=None, mc=None):
    """
    Simulated average BLER of the BS-UAV hop.

    Parameters
    ----------
    config : :py:class:`~fas_uav_relay.systemConfig.SystemConfig`
    corr, fbl : optional
        Derived from ``config`` if not given.
    mc : :py:class:`~fas_uav_relay.systemConfig.McConfig`, optional
        Defaults to ``config.mc``.

    Returns
    -------
    :py:class:`McEstimate`
    """
    return _estimate(config, corr, fbl, mc, "hop1")


def mc_hop2_bler(config, corr=None, fbl=None, mc=None):
    """
    Simulated average BLER of the FAS hop, the mean of
    ε(γ̄_2 · max_n|h_n|²/Σλ_n) with the port selection of ``mc.mode``.
    """
    return _estimate(config, corr, fbl, mc, "hop2")


def mc_end_to_end(config, corr=None, fbl=None, mc=None):
    """
    Simulated overall BLER. Every trial draws a heading, the link states of
    both hops (urban), the fading of both hops and combines the two packet
    error probabilities as ε_1 + (1 - ε_1)ε_2.
    """
    return _estimate(config, corr, fbl, mc, "end_to_end")
