# ------------------------------------------------------------------------------ #
# Command line entry point: sweeps, Monte Carlo validation, EE optimization and
# inspection of the derived quantities of a configuration.
# ------------------------------------------------------------------------------ #

import argparse
import dataclasses
import logging
import os
import sys
import textwrap

import numpy as np
import pandas as pd

from . import data
from .ee_optimizer import BlerEvaluator, ee_surface, joint_optimize
from .exceptions import FasUavError, InfeasibleError, ValidationFailure
from .model.fas_correlation import correlation_model
from .model.finite_blocklength import derive_fbl
from .model.geometry import link_budget
from .systemConfig import load_config
from .utils import linear_to_db, setup_colored_logs, watts_to_dbm

log = logging.getLogger(__name__)

DEFAULT_VALIDATION_GRID = tuple(np.linspace(0.0, 30.0, 9))


class NotALogLevel(argparse.ArgumentTypeError):
    pass


def log_level(string):
    levels = ["DEBUG", "INFO", "WARNING", "ERROR"]
    if string.upper() in levels:
        return string.upper()
    raise NotALogLevel(f"Please choose one of the following log levels: '{levels}'!")


def file_path(string):
    directory = os.path.dirname(string)
    if directory == "" or os.path.isdir(directory):
        return string
    raise NotADirectoryError(f"Please create the folder '{directory}'!")


def float_list(string):
    try:
        return [float(v) for v in string.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma separated numbers: '{string}'"
        )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fas-uav-relay",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        description=textwrap.dedent(
            """\
            FAS-enabled UAV relay
            ---------------------
                Finite blocklength BLER of a two-hop decode-and-forward UAV
                relay with a fluid antenna at the user, Monte Carlo
                validation and energy efficiency optimization.

            """
        ),
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-c",
        "--config",
        default="rural",
        help="Configuration file or bundled preset 'rural'/'urban' (Default is rural)",
    )
    common.add_argument("-o", "--out", type=file_path, default=None, help="CSV output")
    common.add_argument("--seed", type=int, default=None, help="Monte Carlo seed")
    common.add_argument("--trials", type=int, default=None, help="Monte Carlo trials")
    common.add_argument(
        "--workers", type=int, default=None, help="Threads for Monte Carlo chunks"
    )
    common.add_argument(
        "--paper-literal-gcq",
        "--literal-gcq",
        dest="literal_gcq",
        action="store_true",
        help="Average headings with the literal (doubled constant) Chebyshev weights",
    )
    common.add_argument(
        "--verbosity",
        type=log_level,
        default="INFO",
        help="Log level string (Default is 'INFO')",
    )

    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", parents=[common], help="One-dimensional sweep")
    sweep.add_argument(
        "--sweep-var", required=True, choices=list(data.VARIABLES), help="Variable"
    )
    sweep.add_argument("--grid", type=float_list, required=True, help="Grid values")
    sweep.add_argument(
        "--estimators",
        default="closed",
        help=f"Comma separated subset of {','.join(data.ESTIMATORS)}",
    )

    validate = sub.add_parser(
        "validate", parents=[common], help="Closed form against Monte Carlo"
    )
    validate.add_argument(
        "--grid",
        type=float_list,
        default=list(DEFAULT_VALIDATION_GRID),
        help="P_2 grid in dBm (Default is 9 points over 0..30 dBm)",
    )

    sub.add_parser("optimize", parents=[common], help="Joint EE optimization")

    inspect = sub.add_parser(
        "inspect", parents=[common], help="Print the derived quantities"
    )
    inspect.add_argument("--theta", type=float, default=0.0, help="Heading [rad]")
    return parser


def apply_overrides(config, args):
    """Command line options that take precedence over the file."""
    mc = config.mc
    if args.seed is not None:
        mc = dataclasses.replace(mc, seed=args.seed)
    if args.trials is not None:
        mc = dataclasses.replace(mc, trials=args.trials)
    if args.workers is not None:
        mc = dataclasses.replace(mc, workers=args.workers)
    config = dataclasses.replace(config, mc=mc)
    if args.literal_gcq:
        config = config.with_value("literal_gcq", True)
    return config


# ------------------------------------------------------------------------------ #
# Subcommands
# ------------------------------------------------------------------------------ #


def run_sweep(config, sweep, out=None):
    """Runs the sweep and returns the CSV document."""
    df = data.run_sweep(config, sweep)
    return data.table_to_csv(df, config, out, variable=sweep.variable)


def run_validate(config, grid=DEFAULT_VALIDATION_GRID, out=None):
    """
    Compares the closed form with Monte Carlo along a P_2 grid. The verdict
    uses the surrogate simulation, the exact-Q simulation is reported along.

    Returns
    -------
    table : pd.DataFrame
    passed : bool
    """
    table = data.validation_table(config, grid)
    passed = bool(table["pass"].all())
    log.info(f"Validation table:\n{table.to_string(index=False)}")
    if len(table) and table["checked"].any():
        gap = 3 * table.loc[table["checked"], "ratio_exact"].max()
        log.info(f"Exact Q against the closed form: largest gap {gap:.1f} std errors")
    data.table_to_csv(table, config, out, validation="PASS" if passed else "FAIL")
    log.info("PASS" if passed else "FAIL")
    return table, passed


def run_optimize(config, space=None, out=None):
    """
    Joint optimization and the EE surface over (Z_U, L).

    Returns
    -------
    outcome : :py:class:`~fas_uav_relay.ee_optimizer.EeOutcome`
    surface : pd.DataFrame
    """
    space = config.search if space is None else space
    evaluator = BlerEvaluator(config)
    outcome = joint_optimize(space, evaluator)
    surface = data.surface_to_dataframe(ee_surface(space, evaluator))
    data.table_to_csv(surface, config, out, feasible=outcome.feasible)
    log.info(f"{evaluator.calls} pipeline evaluations")
    return outcome, surface


def inspect_config(config, theta=0.0):
    """Derived quantities of a configuration as a printable text."""
    fbl = derive_fbl(config.payload_bits, config.blocklength)
    corr = correlation_model(config.fas)
    budgets = link_budget(config, corr, theta)
    lines = [str(config), "", f"FblParams: {fbl}", ""]
    lines.append(f"eigenvalues: {np.array2string(corr.eigenvalues, precision=6)}")
    lines.append(f"N_eff: {corr.n_eff}, sum of lambda: {corr.lambda_sum:.6f}")
    lines.append("")
    rows = []
    for link, budget in budgets.items():
        rows.append(
            dict(
                link=link,
                gamma1_bar_db=float(linear_to_db(budget.gamma1_bar)),
                gamma2_bar_db=float(linear_to_db(budget.gamma2_bar)),
                p_1=float(budget.p_los_1),
                p_2=float(budget.p_los_2),
            )
        )
    lines.append(f"link budgets at theta={theta:g} rad:")
    lines.append(pd.DataFrame(rows).to_string(index=False))
    return "\n".join(lines)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.getLogger().setLevel(args.verbosity)
    setup_colored_logs()

    try:
        config = apply_overrides(load_config(args.config), args)
        if args.command == "sweep":
            estimators = [e.strip() for e in args.estimators.split(",") if e.strip()]
            sweep = data.SweepSpec(args.sweep_var, args.grid, estimators)
            document = run_sweep(config, sweep, args.out)
            if args.out is None:
                print(document, end="")
        elif args.command == "validate":
            _, passed = run_validate(config, args.grid, args.out)
            if not passed:
                raise ValidationFailure("closed form and Monte Carlo disagree")
        elif args.command == "optimize":
            outcome, _ = run_optimize(config, out=args.out)
            print(outcome)
            if not outcome.feasible:
                raise InfeasibleError(outcome.binding)
            log.info(f"P_2* = {float(watts_to_dbm(outcome.p2_star)):.2f} dBm")
        elif args.command == "inspect":
            print(inspect_config(config, args.theta))
    except FasUavError as e:
        log.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
