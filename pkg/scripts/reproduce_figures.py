# ------------------------------------------------------------------------------ #
# Runs the sweeps behind the BLER and energy efficiency figures and writes one
# CSV per figure panel into an output folder.
#
# Runtime: a few minutes at 10^5 Monte Carlo trials, the EE surfaces dominate.
#
# ------------------------------------------------------------------------------ #

import argparse, os, textwrap, sys, logging, dataclasses

import numpy as np

sys.path.append("../")
import fas_uav_relay
from fas_uav_relay import data
from fas_uav_relay.cli import log_level
from fas_uav_relay.ee_optimizer import BlerEvaluator, ee_surface, ee_versus_ports
from fas_uav_relay.utils import dbm_to_watts


# ------------------------------------------------------------------------------ #
# ARGUMENTS
# ------------------------------------------------------------------------------ #
parser = argparse.ArgumentParser(
    formatter_class=argparse.RawDescriptionHelpFormatter,
    description=textwrap.dedent(
        """\
        Figure sweeps
        -------------
            Evaluates closed form, asymptote, error floor and Monte Carlo
            along the sweeps of every figure and the EE profiles/surfaces.

        """
    ),
)
parser.add_argument(
    "-o", "--out-dir", default="./figures", help="Output folder (Default ./figures)"
)
parser.add_argument(
    "--trials", type=int, default=100_000, help="Monte Carlo trials per point"
)
parser.add_argument(
    "--verbosity",
    type=log_level,
    default="INFO",
    help="Log level string (Default is 'INFO')",
)
args = parser.parse_args()

log = logging.getLogger()
log.setLevel(args.verbosity)
fas_uav_relay.utils.setup_colored_logs()

os.makedirs(args.out_dir, exist_ok=True)


def out(name):
    return os.path.join(args.out_dir, f"{name}.csv")


def with_mc(config, q_model="exact"):
    mc = dataclasses.replace(config.mc, trials=args.trials, q_model=q_model)
    return dataclasses.replace(config, mc=mc)


# ------------------------------------------------------------------------------ #
# 1. Validation: closed form, asymptote, floor and simulation over P_2
# ------------------------------------------------------------------------------ #
rural = fas_uav_relay.load_config("rural").replace(
    nakagami__m1=5, nakagami__m2=5, radio__p1=float(dbm_to_watts(10)), blocklength=100
)
urban = fas_uav_relay.load_config("urban").replace(
    radio__p1=float(dbm_to_watts(40)), blocklength=100
)
grid = list(np.linspace(-10.0, 40.0, 11))
for name, config in (("rural", rural), ("urban", urban)):
    sweep = data.SweepSpec("P_2", grid, ("closed", "asymptotic", "floor", "mc"))
    for q_model in ("exact", "piecewise"):
        df = data.run_sweep(with_mc(config, q_model), sweep)
        path = out(f"validation_{name}_{q_model}")
        data.table_to_csv(df, config, path, variable="P_2", q_model=q_model)

# ------------------------------------------------------------------------------ #
# 2. FAS against a fixed-position antenna (N=1)
# ------------------------------------------------------------------------------ #
for name, config in (("rural", rural), ("urban", urban)):
    for n in (1, 2, 4, 8):
        sweep = data.SweepSpec("P_2", grid, ("closed", "asymptotic"))
        point = config.with_value("fas.n_ports", n)
        df = data.run_sweep(point, sweep)
        data.table_to_csv(df, point, out(f"fas_vs_fpa_{name}_N{n}"), variable="P_2")

# ------------------------------------------------------------------------------ #
# 3. Aperture, fading, blocklength, ports and altitude at fixed P_2
# ------------------------------------------------------------------------------ #
single = {
    "W": ([0.5, 1, 2, 3, 4], {"fas.n_ports": 8}),
    "m": ([1, 2, 3, 5, 7], {}),
    "L": ([100, 150, 200, 300, 400, 500], {}),
    "N": (list(range(1, 11)), {}),
    "Z_U": (list(np.arange(100.0, 801.0, 50.0)), {}),
}
for name, config in (("rural", rural), ("urban", urban)):
    for variable, (values, fixed) in single.items():
        point = config
        for key, value in fixed.items():
            point = point.with_value(key, value)
        sweep = data.SweepSpec(variable, values, ("quadrature", "floor", "ee"))
        df = data.run_sweep(point, sweep)
        data.table_to_csv(df, point, out(f"{variable}_{name}"), variable=variable)

# ------------------------------------------------------------------------------ #
# 4. Minimum UAV power against altitude, L=200, N = 1, 4, 8
# ------------------------------------------------------------------------------ #
altitudes = list(np.arange(100.0, 801.0, 50.0))
for name in ("rural", "urban"):
    config = fas_uav_relay.load_config(name)
    profile = data.min_power_profile(config, altitudes, (1, 4, 8), blocklength=200)
    data.table_to_csv(profile, config, out(f"min_power_vs_altitude_{name}"), L=200)

# ------------------------------------------------------------------------------ #
# 5. EE against the number of ports and the (Z_U, L) surfaces
# ------------------------------------------------------------------------------ #
for name in ("rural", "urban"):
    config = fas_uav_relay.load_config(name)
    evaluator = BlerEvaluator(config)
    for l in (200, 500):
        space = dataclasses.replace(config.search, n_min=1, n_max=24)
        profile = ee_versus_ports(l, config.placement.uav_altitude, space, evaluator)
        data.table_to_csv(profile, config, out(f"ee_vs_ports_{name}_L{l}"), L=l)
    surface = data.surface_to_dataframe(ee_surface(config.search, evaluator))
    data.table_to_csv(surface, config, out(f"ee_surface_{name}"))

log.info(f"All tables written to {args.out_dir}")
