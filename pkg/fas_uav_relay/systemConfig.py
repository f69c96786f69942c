"""
Configuration records for a run. :py:class:`SystemConfig` is the single source
of truth: every scalar of the simulation parameter table plus the scenario
selector, the optimizer search space and the Monte Carlo defaults.

Files are flat INI documents (``section.key`` addresses every value). Power
entries are given either in dBm (``p1_dbm``) or in Watts (``p1_w``); internally
everything is stored in Watts and linear units.
"""
import configparser
import dataclasses
import io
import logging
import math
import os
import pprint
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError
from .utils import dbm_to_watts

log = logging.getLogger(__name__)

SCENARIOS = ("rural", "urban")
MC_MODES = ("analytical_model", "physical_ports")
Q_MODELS = ("exact", "piecewise")

PRESET_DIR = os.path.join(os.path.dirname(__file__), "presets")


def _finite(key, *values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise ConfigError(key, f"value {v} is not finite")


def _positive(key, value):
    _finite(key, value)
    if not value > 0:
        raise ConfigError(key, f"must be strictly positive, got {value}")


def _positive_int(key, value):
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise ConfigError(key, f"must be a positive integer, got {value}")


@dataclass(frozen=True)
class Placement:
    """
    Node coordinates in meters and the circular UAV trajectory.

    Parameters
    ----------
    bs, ue : tuple of 3 floats
        (X, Y, Z) of the base station and the user equipment.
    uav_radius : float
        Radius r of the trajectory, centered on the origin.
    uav_altitude : float
        Flying altitude Z_U.
    """

    bs: tuple
    ue: tuple
    uav_radius: float
    uav_altitude: float

    def __post_init__(self):
        object.__setattr__(self, "bs", tuple(float(v) for v in self.bs))
        object.__setattr__(self, "ue", tuple(float(v) for v in self.ue))
        if len(self.bs) != 3:
            raise ConfigError("placement.bs", "expected three coordinates")
        if len(self.ue) != 3:
            raise ConfigError("placement.ue", "expected three coordinates")
        _finite("placement.bs", *self.bs)
        _finite("placement.ue", *self.ue)
        _positive("placement.uav_radius", self.uav_radius)
        _finite("placement.uav_altitude", self.uav_altitude)
        if self.uav_altitude < 0:
            raise ConfigError("placement.uav_altitude", "must be non-negative")


@dataclass(frozen=True)
class RadioParams:
    """
    Carrier frequency [Hz], noise power and transmit powers [W].
    """

    carrier_freq: float
    noise_power: float
    p1: float
    p2: float

    def __post_init__(self):
        _positive("radio.carrier_freq", self.carrier_freq)
        _positive("radio.noise_power", self.noise_power)
        _positive("radio.p1", self.p1)
        _positive("radio.p2", self.p2)


@dataclass(frozen=True)
class UrbanExcess:
    """
    Excess losses [dB], LoS sigmoid constants and link-type Nakagami shapes.
    """

    eta_los: float = 1.6
    eta_nlos: float = 23.0
    a: float = 12.08
    b: float = 0.11
    m_los: int = 5
    m_nlos: int = 1

    def __post_init__(self):
        _finite("urban.eta_los", self.eta_los)
        _finite("urban.eta_nlos", self.eta_nlos)
        if self.eta_los < 0:
            raise ConfigError("urban.eta_los", "must be non-negative")
        if self.eta_nlos < self.eta_los:
            raise ConfigError("urban.eta_nlos", "must not be smaller than eta_los")
        _positive("urban.a", self.a)
        _positive("urban.b", self.b)
        _positive_int("urban.m_los", self.m_los)
        _positive_int("urban.m_nlos", self.m_nlos)


@dataclass(frozen=True)
class FasGeometry:
    """
    Linear fluid antenna with ``n_ports`` ports over ``aperture`` wavelengths.
    ``rank_tol`` is the relative eigenvalue threshold that defines N_eff.
    """

    n_ports: int
    aperture: float
    rank_tol: float = 1e-9

    def __post_init__(self):
        _positive_int("fas.n_ports", self.n_ports)
        _positive("fas.aperture", self.aperture)
        _positive("fas.rank_tol", self.rank_tol)


@dataclass(frozen=True)
class Nakagami:
    """
    Rural Nakagami shapes of the two hops.
    """

    m1: int = 7
    m2: int = 7

    def __post_init__(self):
        _positive_int("nakagami.m1", self.m1)
        _positive_int("nakagami.m2", self.m2)


@dataclass(frozen=True)
class EeParams:
    """
    Energy model of the UAV: circuit power ``p_c`` [W], port switching power
    ``p_sw`` [W], per-port processing time ``tau_p`` [s], bandwidth ``w_band``
    [Hz] and the payload ``payload_bits``.
    """

    p_c: float
    p_sw: float
    tau_p: float
    w_band: float
    payload_bits: int

    def __post_init__(self):
        _positive("ee.circuit_power", self.p_c)
        _positive("ee.switching_power", self.p_sw)
        _positive("ee.port_time", self.tau_p)
        _positive("ee.bandwidth", self.w_band)
        _positive_int("fbl.payload_bits", self.payload_bits)

    def block_duration(self, blocklength):
        """L/W_band in seconds."""
        return blocklength / self.w_band

    def causal(self, n_ports, blocklength):
        """Port scanning finishes strictly before the block ends."""
        scan, block = n_ports * self.tau_p, self.block_duration(blocklength)
        return scan < block and not math.isclose(scan, block, rel_tol=1e-9)


@dataclass(frozen=True)
class SearchSpace:
    """
    Ranges of the joint EE search. Powers in Watts, altitudes in meters, blocklengths
    in channel uses, ``delta_db`` is the bisection tolerance.
    """

    p_max: float = 10.0
    p_min: float = 1e-6
    z_min: float = 100.0
    z_max: float = 800.0
    z_step: float = 25.0
    l_min: int = 200
    l_max: int = 600
    l_step: int = 50
    n_min: int = 1
    n_max: int = 10
    eps_th: float = 1e-3
    delta_db: float = 0.01
    monotonicity_checks: int = 5
    seed: int = 0

    def __post_init__(self):
        _positive("search.p_max", self.p_max)
        _positive("search.p_min", self.p_min)
        if self.p_min > self.p_max:
            raise ConfigError("search.p_min", "must not exceed p_max")
        if self.z_min > self.z_max or self.z_min < 0:
            raise ConfigError("search.z_min", "empty or negative altitude range")
        _positive("search.z_step", self.z_step)
        _positive_int("search.l_min", self.l_min)
        _positive_int("search.l_max", self.l_max)
        _positive_int("search.l_step", self.l_step)
        if self.l_min > self.l_max:
            raise ConfigError("search.l_min", "must not exceed l_max")
        _positive_int("search.n_min", self.n_min)
        _positive_int("search.n_max", self.n_max)
        if self.n_min > self.n_max:
            raise ConfigError("search.n_min", "must not exceed n_max")
        if not 0 < self.eps_th <= 1:
            raise ConfigError("search.eps_th", "must lie in (0, 1]")
        _positive("search.delta_db", self.delta_db)
        if self.monotonicity_checks < 0:
            raise ConfigError("search.monotonicity_checks", "must be non-negative")

    def z_grid(self):
        num = int(math.floor((self.z_max - self.z_min) / self.z_step + 1e-9)) + 1
        return self.z_min + self.z_step * np.arange(num)

    def l_grid(self):
        return np.arange(self.l_min, self.l_max + 1, self.l_step, dtype="int64")

    def n_grid(self):
        return np.arange(self.n_min, self.n_max + 1, dtype="int64")


@dataclass(frozen=True)
class McConfig:
    """
    Monte Carlo settings.

    Parameters
    ----------
    trials : int
    seed : int
    mode : str
        ``analytical_model`` draws max_n λ_n|g_n|², ``physical_ports`` synthesizes
        h = UΛ^{1/2}g and selects the strongest port.
    headings : str or float
        ``uniform`` or a fixed heading in radians.
    q_model : str
        ``exact`` Gaussian Q per packet or the ``piecewise`` surrogate.
    chunk_size : int
        Trials per independent substream.
    workers : int
        Threads evaluating chunks.
    """

    trials: int = 1_000_000
    seed: int = 20240607
    mode: str = "analytical_model"
    headings: object = "uniform"
    q_model: str = "exact"
    chunk_size: int = 65536
    workers: int = 1

    def __post_init__(self):
        _positive_int("montecarlo.trials", self.trials)
        if self.mode not in MC_MODES:
            raise ConfigError("montecarlo.mode", f"expected one of {MC_MODES}")
        if self.q_model not in Q_MODELS:
            raise ConfigError("montecarlo.q_model", f"expected one of {Q_MODELS}")
        if self.headings != "uniform":
            try:
                object.__setattr__(self, "headings", float(self.headings))
            except (TypeError, ValueError):
                raise ConfigError(
                    "montecarlo.headings", "expected 'uniform' or a heading in radians"
                )
        _positive_int("montecarlo.chunk_size", self.chunk_size)
        _positive_int("montecarlo.workers", self.workers)


@dataclass(frozen=True)
class SystemConfig:
    """
    Complete description of one run.

    Use :py:func:`load_config` to read a file and :py:meth:`with_value` to derive
    modified copies, e.g. ``config.with_value("radio.p2", 0.1)``.
    """

    scenario: str
    placement: Placement
    radio: RadioParams
    fas: FasGeometry
    payload_bits: int
    blocklength: int
    ee: EeParams
    nakagami: Nakagami = field(default_factory=Nakagami)
    urban: UrbanExcess = None
    search: SearchSpace = field(default_factory=SearchSpace)
    mc: McConfig = field(default_factory=McConfig)
    quadrature_order: int = 32
    literal_gcq: bool = False

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError("scenario.name", f"expected one of {SCENARIOS}")
        if self.scenario == "urban" and self.urban is None:
            raise ConfigError("urban", "section required for the urban scenario")
        _positive_int("fbl.payload_bits", self.payload_bits)
        _positive_int("fbl.blocklength", self.blocklength)
        _positive_int("quadrature.order", self.quadrature_order)
        if self.ee.payload_bits != self.payload_bits:
            object.__setattr__(
                self, "ee", dataclasses.replace(self.ee, payload_bits=self.payload_bits)
            )

    @property
    def is_urban(self):
        return self.scenario == "urban"

    def with_value(self, key, value):
        """
        Returns a copy with one dotted key replaced, e.g. ``fas.n_ports``.
        Top-level keys (``blocklength``) need no dot.
        """
        if "." not in key:
            changed = dataclasses.replace(self, **{key: value})
        else:
            section, name = key.split(".", 1)
            record = getattr(self, section)
            changed = dataclasses.replace(
                self, **{section: dataclasses.replace(record, **{name: value})}
            )
        if key == "payload_bits":
            changed = dataclasses.replace(
                changed, ee=dataclasses.replace(changed.ee, payload_bits=value)
            )
        return changed

    def replace(self, **overrides):
        """
        Copy with several keys replaced, nested keys joined by a double
        underscore, e.g. ``config.replace(radio__p2=0.1, blocklength=300)``.
        """
        changed = self
        for key, value in overrides.items():
            changed = changed.with_value(key.replace("__", "."), value)
        return changed

    @property
    def summary(self):
        summary = {
            "scenario": self.scenario,
            "bs": self.placement.bs,
            "ue": self.placement.ue,
            "r": self.placement.uav_radius,
            "Z_U": self.placement.uav_altitude,
            "P_1 [W]": self.radio.p1,
            "P_2 [W]": self.radio.p2,
            "N": self.fas.n_ports,
            "W": self.fas.aperture,
            "B": self.payload_bits,
            "L": self.blocklength,
        }
        if self.is_urban:
            summary["m_los/m_nlos"] = (self.urban.m_los, self.urban.m_nlos)
        else:
            summary["m_1/m_2"] = (self.nakagami.m1, self.nakagami.m2)
        return summary

    def __str__(self):
        return pprint.pformat(self.summary, sort_dicts=False)


# ------------------------------------------------------------------------------ #
# Parsing
# ------------------------------------------------------------------------------ #


class _Reader:
    """Typed access to a parsed INI document with key-path errors."""

    def __init__(self, parser):
        self.parser = parser
        self.used = set()

    def has(self, section, name):
        return self.parser.has_option(section, name)

    def unused(self):
        """Keys of the document that no field consumed, in document order."""
        return [
            f"{section}.{name}"
            for section in self.parser.sections()
            for name in self.parser.options(section)
            if f"{section}.{name}" not in self.used
        ]

    def raw(self, section, name, default=None):
        key = f"{section}.{name}"
        if not self.has(section, name):
            if default is None:
                raise ConfigError(key, "missing key")
            return default
        self.used.add(key)
        return self.parser.get(section, name).strip()

    def float(self, section, name, default=None):
        value = self.raw(section, name, default)
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{section}.{name}", f"expected a number, got '{value}'")

    def int(self, section, name, default=None):
        value = self.raw(section, name, default)
        try:
            number = float(value)
        except ValueError:
            raise ConfigError(
                f"{section}.{name}", f"expected an integer, got '{value}'"
            )
        if not number.is_integer():
            raise ConfigError(
                f"{section}.{name}", f"expected an integer, got '{value}'"
            )
        return int(number)

    def bool(self, section, name, default=None):
        value = str(self.raw(section, name, default)).lower()
        if value in ("1", "true", "yes", "on"):
            return True
        if value in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{section}.{name}", f"expected a boolean, got '{value}'")

    def vector(self, section, name):
        value = self.raw(section, name)
        try:
            return tuple(float(v) for v in value.split(","))
        except ValueError:
            raise ConfigError(
                f"{section}.{name}", f"expected comma separated numbers, got '{value}'"
            )

    def power(self, section, name, default_dbm=None):
        """Power given as ``<name>_dbm`` or ``<name>_w``, returned in Watts."""
        has_dbm = self.has(section, f"{name}_dbm")
        has_w = self.has(section, f"{name}_w")
        if has_dbm and has_w:
            raise ConfigError(f"{section}.{name}", "give either _dbm or _w, not both")
        if has_w:
            return self.float(section, f"{name}_w")
        if has_dbm or default_dbm is None:
            return float(dbm_to_watts(self.float(section, f"{name}_dbm")))
        return float(dbm_to_watts(default_dbm))


def parse_config(text):
    """
    Parses a configuration document, see :py:func:`load_config`.
    """
    parser = configparser.ConfigParser(
        comment_prefixes=("#", ";"), inline_comment_prefixes=("#",)
    )
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError("<document>", f"not a valid key-value document ({e})")
    r = _Reader(parser)

    scenario = r.raw("scenario", "name")
    placement = Placement(
        bs=r.vector("placement", "bs"),
        ue=r.vector("placement", "ue"),
        uav_radius=r.float("placement", "uav_radius"),
        uav_altitude=r.float("placement", "uav_altitude"),
    )
    radio = RadioParams(
        carrier_freq=r.float("radio", "carrier_freq"),
        noise_power=r.power("radio", "noise_power"),
        p1=r.power("radio", "p1"),
        p2=r.power("radio", "p2"),
    )
    fas = FasGeometry(
        n_ports=r.int("fas", "n_ports"),
        aperture=r.float("fas", "aperture"),
        rank_tol=r.float("fas", "rank_tol", "1e-9"),
    )
    payload_bits = r.int("fbl", "payload_bits")
    ee = EeParams(
        p_c=r.power("ee", "circuit_power"),
        p_sw=r.power("ee", "switching_power"),
        tau_p=r.float("ee", "port_time"),
        w_band=r.float("ee", "bandwidth"),
        payload_bits=payload_bits,
    )
    if scenario == "urban":
        urban = UrbanExcess(
            eta_los=r.float("urban", "eta_los"),
            eta_nlos=r.float("urban", "eta_nlos"),
            a=r.float("urban", "a"),
            b=r.float("urban", "b"),
            m_los=r.int("urban", "m_los"),
            m_nlos=r.int("urban", "m_nlos"),
        )
        nakagami = Nakagami(
            m1=r.int("nakagami", "m1", "7"), m2=r.int("nakagami", "m2", "7")
        )
    else:
        urban = None
        nakagami = Nakagami(m1=r.int("nakagami", "m1"), m2=r.int("nakagami", "m2"))

    defaults = SearchSpace()
    search = SearchSpace(
        p_max=r.power("search", "p_max", default_dbm=40.0),
        p_min=r.power("search", "p_min", default_dbm=-30.0),
        z_min=r.float("search", "z_min", str(defaults.z_min)),
        z_max=r.float("search", "z_max", str(defaults.z_max)),
        z_step=r.float("search", "z_step", str(defaults.z_step)),
        l_min=r.int("search", "l_min", str(defaults.l_min)),
        l_max=r.int("search", "l_max", str(defaults.l_max)),
        l_step=r.int("search", "l_step", str(defaults.l_step)),
        n_min=r.int("search", "n_min", str(defaults.n_min)),
        n_max=r.int("search", "n_max", str(defaults.n_max)),
        eps_th=r.float("search", "eps_th", str(defaults.eps_th)),
        delta_db=r.float("search", "delta_db", str(defaults.delta_db)),
        monotonicity_checks=r.int(
            "search", "monotonicity_checks", str(defaults.monotonicity_checks)
        ),
        seed=r.int("search", "seed", str(defaults.seed)),
    )
    mc_defaults = McConfig()
    mc = McConfig(
        trials=r.int("montecarlo", "trials", str(mc_defaults.trials)),
        seed=r.int("montecarlo", "seed", str(mc_defaults.seed)),
        mode=r.raw("montecarlo", "mode", mc_defaults.mode),
        headings=r.raw("montecarlo", "headings", mc_defaults.headings),
        q_model=r.raw("montecarlo", "q_model", mc_defaults.q_model),
        chunk_size=r.int("montecarlo", "chunk_size", str(mc_defaults.chunk_size)),
        workers=r.int("montecarlo", "workers", str(mc_defaults.workers)),
    )
    config = SystemConfig(
        scenario=scenario,
        placement=placement,
        radio=radio,
        fas=fas,
        payload_bits=payload_bits,
        blocklength=r.int("fbl", "blocklength"),
        ee=ee,
        nakagami=nakagami,
        urban=urban,
        search=search,
        mc=mc,
        quadrature_order=r.int("quadrature", "order", "32"),
        literal_gcq=r.bool("quadrature", "literal_gcq", "false"),
    )
    unknown = r.unused()
    if unknown:
        raise ConfigError(unknown[0], f"unknown key(s) {', '.join(unknown)}")
    log.debug(f"Parsed configuration:\n{config}")
    return config


def load_config(path):
    """
    Loads and validates a configuration file.

    Parameters
    ----------
    path : str
        Path of the file, or the name of a bundled preset (``rural``/``urban``).

    Returns
    -------
    :py:class:`SystemConfig`

    Raises
    ------
    ConfigError
        Naming the offending key, e.g. ``fas.aperture``.
    """
    if not os.path.exists(path) and path in ("rural", "urban"):
        path = os.path.join(PRESET_DIR, f"{path}.cfg")
    if not os.path.exists(path):
        raise ConfigError("<file>", f"configuration file '{path}' not found")
    with open(path, encoding="utf-8") as f:
        return parse_config(f.read())


def dump_config(config, path=None):
    """
    Serializes a config. Every float is written with ``repr`` and powers in
    Watts, so ``parse_config(dump_config(c)) == c``.

    Returns
    -------
    str
    """
    r = repr
    sections = {
        "scenario": {"name": config.scenario},
        "placement": {
            "bs": ", ".join(r(v) for v in config.placement.bs),
            "ue": ", ".join(r(v) for v in config.placement.ue),
            "uav_radius": r(config.placement.uav_radius),
            "uav_altitude": r(config.placement.uav_altitude),
        },
        "radio": {
            "carrier_freq": r(config.radio.carrier_freq),
            "noise_power_w": r(config.radio.noise_power),
            "p1_w": r(config.radio.p1),
            "p2_w": r(config.radio.p2),
        },
        "fas": {
            "n_ports": str(config.fas.n_ports),
            "aperture": r(config.fas.aperture),
            "rank_tol": r(config.fas.rank_tol),
        },
        "fbl": {
            "payload_bits": str(config.payload_bits),
            "blocklength": str(config.blocklength),
        },
        "nakagami": {"m1": str(config.nakagami.m1), "m2": str(config.nakagami.m2)},
        "ee": {
            "circuit_power_w": r(config.ee.p_c),
            "switching_power_w": r(config.ee.p_sw),
            "port_time": r(config.ee.tau_p),
            "bandwidth": r(config.ee.w_band),
        },
    }
    if config.urban is not None:
        sections["urban"] = {
            "eta_los": r(config.urban.eta_los),
            "eta_nlos": r(config.urban.eta_nlos),
            "a": r(config.urban.a),
            "b": r(config.urban.b),
            "m_los": str(config.urban.m_los),
            "m_nlos": str(config.urban.m_nlos),
        }
    s = config.search
    sections["search"] = {
        "p_max_w": r(s.p_max),
        "p_min_w": r(s.p_min),
        "z_min": r(float(s.z_min)),
        "z_max": r(float(s.z_max)),
        "z_step": r(float(s.z_step)),
        "l_min": str(s.l_min),
        "l_max": str(s.l_max),
        "l_step": str(s.l_step),
        "n_min": str(s.n_min),
        "n_max": str(s.n_max),
        "eps_th": r(s.eps_th),
        "delta_db": r(s.delta_db),
        "monotonicity_checks": str(s.monotonicity_checks),
        "seed": str(s.seed),
    }
    sections["quadrature"] = {
        "order": str(config.quadrature_order),
        "literal_gcq": str(config.literal_gcq).lower(),
    }
    mc = config.mc
    sections["montecarlo"] = {
        "trials": str(mc.trials),
        "seed": str(mc.seed),
        "mode": mc.mode,
        "headings": mc.headings if mc.headings == "uniform" else r(mc.headings),
        "q_model": mc.q_model,
        "chunk_size": str(mc.chunk_size),
        "workers": str(mc.workers),
    }

    parser = configparser.ConfigParser()
    parser.read_dict(sections)
    buffer = io.StringIO()
    parser.write(buffer)
    text = buffer.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    return text
