"""
Energy efficiency of the FAS hop and its hierarchical maximization.

The search nests three scans: the blocklength L (outer), the altitude Z_U and
the number of ports N. For each (L, Z_U, N) the smallest UAV power meeting the
reliability target is found by bisection in the dB domain, because the
average BLER is non-increasing in P_2.
"""
import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
import xarray as xr
from tqdm.auto import tqdm

from .exceptions import CausalityError, MonotonicityError
from .model.bler_analytic import average_bler
from .model.fas_correlation import correlation_model
from .model.finite_blocklength import derive_fbl
from .utils import dbm_to_watts, progress_disabled, watts_to_dbm

log = logging.getLogger(__name__)

MONOTONICITY_TOL = 1e-9


def energy_efficiency(bler, p2, n, l, ee):
    """
    Delivered bits per Joule,

    B(1 - ε) / [P_2(L/W - Nτ_p) + P_c L/W + P_sw Nτ_p].

    Parameters
    ----------
    bler : float
        Overall average BLER.
    p2 : float
        UAV transmit power [W].
    n : int
        Number of FAS ports scanned before each block.
    l : int
        Blocklength in channel uses.
    ee : :py:class:`~fas_uav_relay.systemConfig.EeParams`

    Raises
    ------
    CausalityError
        If scanning the ports takes the whole block.
    """
    if not ee.causal(n, l):
        raise CausalityError(
            f"causality violated: N*tau_p = {n * ee.tau_p:.3e} s >= "
            f"L/W_band = {ee.block_duration(l):.3e} s"
        )
    block = ee.block_duration(l)
    scan = n * ee.tau_p
    energy = p2 * (block - scan) + ee.p_c * block + ee.p_sw * scan
    return ee.payload_bits * (1 - bler) / energy


@dataclass(frozen=True)
class BisectionResult:
    """
    Outcome of :py:func:`min_power_bisection`.

    Attributes
    ----------
    p_star : float or None
        Smallest feasible power [W] on the δ grid, None if infeasible.
    feasible : bool
    iterations : int
        Halvings of the bracket.
    calls : int
        Evaluator calls including the two end points.
    bler : float
        BLER at ``p_star`` (at P_max if infeasible).
    """

    p_star: float
    feasible: bool
    iterations: int
    calls: int
    bler: float


def bisection_bound(space):
    """Number of halvings needed to shrink [P_min, P_max] below δ dB."""
    span = float(watts_to_dbm(space.p_max) - watts_to_dbm(space.p_min))
    if span <= space.delta_db:
        return 0
    return math.ceil(math.log2(span / space.delta_db))


def _check_monotone(history, checks, seed):
    if len(history) < 2 or checks == 0:
        return
    rng = np.random.default_rng(seed)
    for _ in range(checks):
        i, j = rng.choice(len(history), size=2, replace=False)
        (p_a, bler_a), (p_b, bler_b) = sorted([history[i], history[j]])
        if bler_a < bler_b - MONOTONICITY_TOL:
            raise MonotonicityError(
                f"monotonicity violated: BLER({p_a:.3f} dBm) = {bler_a:.6e} < "
                f"BLER({p_b:.3f} dBm) = {bler_b:.6e}"
            )


def min_power_bisection(evaluator, space, fixed=None):
    """
    Minimum UAV power satisfying BLER ≤ ε_th.

    Parameters
    ----------
    evaluator : callable
        P_2 [W] → average BLER, non-increasing.
    space : :py:class:`~fas_uav_relay.systemConfig.SearchSpace`
        Supplies P_min, P_max, ε_th, δ and the spot-check settings.
    fixed : tuple, optional
        (L, Z_U, N), only used in log messages.

    Returns
    -------
    :py:class:`BisectionResult`

    Raises
    ------
    MonotonicityError
        If random pairs of evaluated powers are ordered the wrong way.
    """
    history = []

    def bler_at(p_dbm):
        bler = float(evaluator(float(dbm_to_watts(p_dbm))))
        history.append((p_dbm, bler))
        return bler

    low = float(watts_to_dbm(space.p_min))
    high = float(watts_to_dbm(space.p_max))

    bler_high = bler_at(high)
    if bler_high > space.eps_th:
        log.debug(f"{fixed}: infeasible, BLER(P_max) = {bler_high:.3e}")
        return BisectionResult(None, False, 0, len(history), bler_high)
    bler_low = bler_at(low)
    if bler_low <= space.eps_th:
        return BisectionResult(space.p_min, True, 0, len(history), bler_low)

    iterations = 0
    while high - low > space.delta_db:
        mid = 0.5 * (low + high)
        bler_mid = bler_at(mid)
        if bler_mid > space.eps_th:
            low = mid
        else:
            high, bler_high = mid, bler_mid
        iterations += 1

    _check_monotone(history, space.monotonicity_checks, space.seed)
    p_star = float(dbm_to_watts(high))
    log.debug(f"{fixed}: P_2* = {high:.3f} dBm after {iterations} halvings")
    return BisectionResult(p_star, True, iterations, len(history), bler_high)


class BlerEvaluator:
    """
    Cached overall average BLER ε̄_O(P_2; L, Z_U, N) of a base configuration.

    Results are keyed by (L, Z_U, N, P_2 rounded to 0.001 dB). Correlation
    models and FBL constants are cached per N and L. Not thread safe, the
    searches call it sequentially.

    Parameters
    ----------
    config : :py:class:`~fas_uav_relay.systemConfig.SystemConfig`
        Everything not searched over.
    method : str, default: "auto"
        FAS hop evaluation, see :py:func:`~fas_uav_relay.model.bler_analytic.hop2_bler`.

    Attributes
    ----------
    calls : int
        Number of pipeline evaluations (cache misses).
    """

    def __init__(self, config, method="auto"):
        self.config = config
        self.method = method
        self.calls = 0
        self._cache = {}
        self._corr = {}
        self._fbl = {}

    def _correlation(self, n):
        if n not in self._corr:
            geom = dataclasses.replace(self.config.fas, n_ports=int(n))
            self._corr[n] = correlation_model(geom)
        return self._corr[n]

    def _blocklength(self, l):
        if l not in self._fbl:
            self._fbl[l] = derive_fbl(self.config.payload_bits, int(l))
        return self._fbl[l]

    def cell_config(self, l, z, n, p2):
        return self.config.replace(
            blocklength=int(l),
            placement__uav_altitude=float(z),
            fas__n_ports=int(n),
            radio__p2=float(p2),
        )

    def __call__(self, l, z, n, p2):
        key = (int(l), float(z), int(n), round(float(watts_to_dbm(p2)), 3))
        if key in self._cache:
            return self._cache[key]
        config = self.cell_config(l, z, n, p2)
        bler = average_bler(
            config, self._correlation(n), self._blocklength(l), method=self.method
        )
        self._cache[key] = bler
        self.calls += 1
        return bler

    def for_cell(self, l, z, n):
        """The P_2 → BLER function of one (L, Z_U, N) cell."""
        return lambda p2: self(l, z, n, p2)


@dataclass(frozen=True)
class EeOutcome:
    """
    Optimum of the grid search.

    Attributes
    ----------
    l_star, z_star, n_star, p2_star
        Optimal blocklength, altitude [m], number of ports and UAV power [W].
    ee_max : float
        Energy efficiency [bits/J], 0 if infeasible.
    feasible : bool
    bler : float
        Overall BLER at the optimum, re-evaluated. For an infeasible outcome
        the smallest BLER at P_max over all causal cells, None if no cell
        satisfies causality.
    binding : str
        Diagnostic of the constraint that made the search infeasible. Causality
        is only reported when it fails in every cell.
    """

    l_star: int = None
    z_star: float = None
    n_star: int = None
    p2_star: float = None
    ee_max: float = 0.0
    feasible: bool = False
    bler: float = None
    binding: str = None


# ------------------------------------------------------------------------------ #
# Nested scans
# ------------------------------------------------------------------------------ #


def ee_versus_ports(l, z, space, evaluator):
    """
    EE profile over the port range at fixed (L, Z_U).

    Parameters
    ----------
    l : int
    z : float
    space : :py:class:`~fas_uav_relay.systemConfig.SearchSpace`
    evaluator : :py:class:`BlerEvaluator`

    Returns
    -------
    pd.DataFrame
        Columns ``n, causality_ok, feasible, p2_star, bler, ee``. The EE is 0
        where causality or the reliability target fails. ``bler`` of a causal
        but unreliable row is the BLER at P_max, NaN where causality fails.
    """
    ee_params = evaluator.config.ee
    rows = []
    for n in space.n_grid():
        n = int(n)
        row = dict(n=n, causality_ok=ee_params.causal(n, l), feasible=False)
        row.update(p2_star=np.nan, bler=np.nan, ee=0.0)
        if row["causality_ok"]:
            result = min_power_bisection(evaluator.for_cell(l, z, n), space, (l, z, n))
            row["bler"] = result.bler
            if result.feasible:
                # reliability re-checked at the returned power
                bler = evaluator(l, z, n, result.p_star)
                if bler <= space.eps_th:
                    row.update(
                        feasible=True,
                        p2_star=result.p_star,
                        bler=bler,
                        ee=energy_efficiency(bler, result.p_star, n, l, ee_params),
                    )
                else:
                    row["bler"] = bler
                    log.warning(
                        f"(L={l}, Z={z}, N={n}): BLER {bler:.3e} at P_2* exceeds "
                        f"the target, cell discarded"
                    )
        rows.append(row)
    return pd.DataFrame(rows)


CAUSALITY_BINDING = "causality: N*tau_p >= L/W_band for every N"


def _nearest_infeasible(l, z, profile):
    """
    Infeasible outcome of a cell, reporting the causal N whose BLER at P_max
    comes closest to the target.
    """
    causal = profile[profile["causality_ok"]]
    if causal.empty:
        return EeOutcome(l_star=int(l), z_star=float(z), binding=CAUSALITY_BINDING)
    nearest = causal.loc[causal["bler"].idxmin()]
    return EeOutcome(
        l_star=int(l),
        z_star=float(z),
        n_star=int(nearest["n"]),
        bler=float(nearest["bler"]),
        binding=(
            f"reliability: BLER(P_max) = {nearest['bler']:.3e} > eps_th in the nearest "
            f"cell (L={int(l)}, Z_U={float(z):g}, N={int(nearest['n'])})"
        ),
    )


def optimal_ports(l, z, space, evaluator):
    """
    Number of ports maximizing EE at fixed (L, Z_U), ties toward smaller N.

    Returns
    -------
    :py:class:`EeOutcome`
        If no N is feasible, the outcome of the causal N nearest to the target.
    """
    profile = ee_versus_ports(l, z, space, evaluator)
    feasible = profile[profile["feasible"]]
    if feasible.empty:
        return _nearest_infeasible(l, z, profile)
    best = feasible.loc[feasible["ee"].idxmax()]
    return EeOutcome(
        l_star=int(l),
        z_star=float(z),
        n_star=int(best["n"]),
        p2_star=float(best["p2_star"]),
        ee_max=float(best["ee"]),
        feasible=True,
        bler=float(best["bler"]),
    )


def _better(candidate, incumbent):
    if candidate.feasible != incumbent.feasible:
        return candidate.feasible
    if candidate.feasible:
        return candidate.ee_max > incumbent.ee_max
    # both infeasible: smallest BLER at P_max, cells without a causal N last
    if candidate.bler is None:
        return False
    return incumbent.bler is None or candidate.bler < incumbent.bler


def optimal_altitude(l, space, evaluator):
    """
    Altitude maximizing EE at fixed L with nested :py:func:`optimal_ports`.
    Ties toward lower altitude.
    """
    best = None
    for z in space.z_grid():
        outcome = optimal_ports(l, float(z), space, evaluator)
        if best is None or _better(outcome, best):
            best = outcome
    return best


def joint_optimize(space, evaluator):
    """
    Grid optimum over (L, Z_U, N, P_2).

    Parameters
    ----------
    space : :py:class:`~fas_uav_relay.systemConfig.SearchSpace`
    evaluator : :py:class:`BlerEvaluator`

    Returns
    -------
    :py:class:`EeOutcome`
        ``feasible=False`` with ``binding`` set if no cell meets the
        constraints.
    """
    best = None
    for l in tqdm(space.l_grid(), desc="L", disable=progress_disabled()):
        outcome = optimal_altitude(int(l), space, evaluator)
        if best is None or _better(outcome, best):
            best = outcome
    if best.feasible:
        log.info(
            f"Optimum: L*={best.l_star}, Z_U*={best.z_star:g} m, N*={best.n_star}, "
            f"P_2*={float(watts_to_dbm(best.p2_star)):.2f} dBm, "
            f"EE={best.ee_max:.4e} bits/J"
        )
    else:
        log.info(f"No feasible configuration, {best.binding}")
    return best


def ee_surface(space, evaluator):
    """
    EE_max over the (Z_U, L) grid, maximized over N and P_2.

    Returns
    -------
    xr.DataArray
        Dimensions ``altitude`` and ``blocklength``, 0 where infeasible.
        ``n_star`` and ``p2_star`` are attached as coordinates.
    """
    z_grid, l_grid = space.z_grid(), space.l_grid()
    ee = np.zeros((len(z_grid), len(l_grid)))
    n_star = np.zeros_like(ee, dtype="int64")
    p2_star = np.full_like(ee, np.nan)
    for j, l in enumerate(tqdm(l_grid, desc="EE surface", disable=progress_disabled())):
        for i, z in enumerate(z_grid):
            outcome = optimal_ports(int(l), float(z), space, evaluator)
            if outcome.feasible:
                ee[i, j] = outcome.ee_max
                n_star[i, j] = outcome.n_star
                p2_star[i, j] = outcome.p2_star
    dims = ("altitude", "blocklength")
    return xr.DataArray(
        ee,
        dims=dims,
        coords={
            "altitude": z_grid,
            "blocklength": l_grid,
            "n_star": (dims, n_star),
            "p2_star": (dims, p2_star),
        },
        name="ee_max",
        attrs={"units": "bits/J"},
    )
