import os
import sys
import math
import logging
import argparse
import configparser
from dataclasses import dataclass

import ubp.config
import ubp.plugins
from ubp.analysis import excess_growth, prior_lower_bound
from ubp.backtest import MODES, run_universal_backtest
from ubp.errors import EXIT_CONVERGENCE, EXIT_INPUT, EXIT_OK, InputError, UBPError
from ubp.hindsight import best_in_hindsight, kelly_counts, kelly_hindsight
from ubp.hotstock import hotstock_closed_forms, hotstock_history, hotstock_trajectory, hotstock_universal_1linear
from ubp.market_data import load_history, pad_incomplete, serialize_history
from ubp.plugins import Document
from ubp.strategy import extremal_decomposition
from ubp.universal import PriorSpec


logger = logging.getLogger(__name__)

COMMANDS = ("backtest", "hindsight", "bounds", "example")


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs, after merging flags, environment and the config file."""

    command: str
    input_path: str = None
    order: int = 2
    prior_alpha: float = 1.0
    n_samples: int = 100000
    seed: int = 42
    tol: float = 1e-10
    max_iter: int = 50000
    output_path: str = None
    output_format: str = "json"
    mode: str = "auto"
    threads: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError("Unknown command '{}'".format(self.command))
        if self.n_samples < 1:
            raise InputError("--samples must be at least 1")
        if self.order < 1:
            raise InputError("--order must be at least 1")
        if not self.prior_alpha > 0:
            raise InputError("--prior-alpha must be positive")
        if not self.tol > 0:
            raise InputError("--tol must be positive")
        if self.max_iter < 1:
            raise InputError("--max-iter must be at least 1")
        if self.mode not in MODES:
            raise InputError("--mode must be one of " + ", ".join(MODES))

    @classmethod
    def from_arguments(cls, command, arguments, config):
        def pick(name, section, option, convert):
            value = getattr(arguments, name, None)
            return value if value is not None else convert(config[section][option])

        return cls(
            command=command,
            input_path=getattr(arguments, "input", None),
            order=_first_given(getattr(arguments, "order", None), 2),
            prior_alpha=pick("prior_alpha", "UNIVERSAL", "PRIOR_ALPHA", float),
            n_samples=pick("samples", "UNIVERSAL", "SAMPLES", int),
            seed=pick("seed", "UNIVERSAL", "SEED", int),
            tol=pick("tol", "HINDSIGHT", "TOLERANCE", float),
            max_iter=pick("max_iter", "HINDSIGHT", "MAX_ITER", int),
            output_path=getattr(arguments, "output", None),
            output_format=pick("format", "OUTPUT", "FORMAT", str),
            mode=pick("mode", "UNIVERSAL", "MODE", str),
            threads=ubp.config.resolve_threads(config),
        )


def _first_given(value, default):
    return value if value is not None else default


def _number(value):
    return "{:.6g}".format(value) if value is not None else "-"


def backtest(arguments, config):
    cfg = RunConfig.from_arguments("backtest", arguments, config)
    return cmd_backtest(cfg)


def cmd_backtest(cfg):
    history = load_history(cfg.input_path, cfg.order)
    record = run_universal_backtest(
        history,
        prior=PriorSpec(cfg.prior_alpha),
        n_samples=cfg.n_samples,
        seed=cfg.seed,
        mode=cfg.mode,
        tol=cfg.tol,
        max_iter=cfg.max_iter,
        workers=cfg.threads,
    )

    for period in record.periods:
        print("t={:<6d} log_W={:<14s} log_D={:<14s} log_R={:<14s} log_bound={:<14s} ess={}".format(
            period.t,
            _number(period.universal_log_wealth),
            _number(period.hindsight_log_wealth),
            _number(period.competitive_ratio_log),
            _number(period.bound_log),
            _number(period.ess),
        ))

    if cfg.output_path is not None:
        ubp.plugins.export(Document(record.to_dict(), record.to_table()), cfg.output_format, cfg.output_path)

    if not record.meta["hindsight_converged"]:
        print("Hindsight solver did not reach tolerance {:g}".format(cfg.tol), file=sys.stderr)
        return EXIT_CONVERGENCE

    if record.meta["quadrature_converged"] is False:
        print("Quadrature did not settle; universal values are estimates", file=sys.stderr)
        return EXIT_CONVERGENCE

    return EXIT_OK


def hindsight(arguments, config):
    cfg = RunConfig.from_arguments("hindsight", arguments, config)
    return cmd_hindsight(cfg, exact_kelly=arguments.exact_kelly)


def cmd_hindsight(cfg, exact_kelly=False):
    history = pad_incomplete(load_history(cfg.input_path, cfg.order))

    if exact_kelly:
        result = kelly_hindsight(kelly_counts(history))
        method = "kelly"
    else:
        result = best_in_hindsight(history, tol=cfg.tol, max_iter=cfg.max_iter)
        method = "frank-wolfe"

    decomposition = extremal_decomposition(result.strategy)

    print("log_D={} iterations={} gap={:.3g} converged={}".format(
        _number(result.log_wealth), result.iterations, result.gap_certificate, result.converged
    ))
    for index, weight in decomposition:
        print("  b_{} = {:.10g}".format("_".join(map(str, index)), weight))

    payload = {
        "method": method,
        "strategy": result.strategy.to_dict(),
        "log_wealth": result.log_wealth,
        "iterations": result.iterations,
        "gap_certificate": result.gap_certificate,
        "converged": result.converged,
        "decomposition": [[list(index), weight] for index, weight in decomposition],
    }
    table = [["index", "weight"]] + [[",".join(map(str, index)), weight] for index, weight in decomposition]

    if cfg.output_path is not None:
        ubp.plugins.export(Document(payload, table), cfg.output_format, cfg.output_path)

    return EXIT_OK if result.converged else EXIT_CONVERGENCE


def bounds(arguments, config):
    cfg = RunConfig.from_arguments("bounds", arguments, config)
    return cmd_bounds(cfg, arguments.assets, arguments.orders, arguments.periods)


def bounds_table(assets, orders, periods, prior):
    rows = []
    for m in assets:
        for order in orders:
            for t in periods:
                if m < 1 or order < 1 or t < 0:
                    raise InputError("Bounds need m >= 1, H >= 1 and T >= 0")

                log_bound = prior_lower_bound(prior, m, order, t)
                growth = excess_growth(0.0, t, m, order, prior) if t > 0 else None
                rows.append({
                    "m": m,
                    "H": order,
                    "T": t,
                    "prior_alpha": prior.concentration,
                    "log_bound": log_bound,
                    "bound": math.exp(log_bound),
                    "excess_growth_bound": growth.bound_rate if growth else None,
                    "excess_growth_asymptote": growth.asymptote if growth else None,
                })
    return rows


def cmd_bounds(cfg, assets, orders, periods):
    rows = bounds_table(assets, orders, periods, PriorSpec(cfg.prior_alpha))

    header = list(rows[0].keys()) if rows else []
    table = [header] + [[row[key] for key in header] for row in rows]

    print("{:>4} {:>3} {:>10} {:>16} {:>14} {:>14}".format("m", "H", "T", "log_bound", "bound", "excess_bound"))
    for row in rows:
        print("{:>4} {:>3} {:>10} {:>16.8g} {:>14.6g} {:>14}".format(
            row["m"], row["H"], row["T"], row["log_bound"], row["bound"], _number(row["excess_growth_bound"])
        ))

    if cfg.output_path is not None:
        ubp.plugins.export(Document({"bounds": rows}, table), cfg.output_format, cfg.output_path)

    return EXIT_OK


def example(arguments, config):
    cfg = RunConfig.from_arguments("example", arguments, config)
    return cmd_example(cfg, arguments.name, arguments.periods, arguments.history)


def cmd_example(cfg, name, periods, history_path=None):
    if name != "hot-stock":
        raise InputError("Unknown example '{}'".format(name))
    if periods < 0:
        raise InputError("--periods cannot be negative")

    report = hotstock_closed_forms(periods)
    one_linear = hotstock_universal_1linear(periods)

    print("Hot stock vs. cash after {} periods".format(periods))
    print("  universal bilinear wealth   {:.10g}".format(report.universal_wealth))
    print("  universal 1-linear wealth   {:.10g}".format(one_linear))
    print("  best bilinear in hindsight  {:.10g}".format(report.hindsight_wealth))
    print("  best CRP in hindsight       {:.10g}".format(report.crp_hindsight_wealth))
    print("  competitive ratio           {:.10g}".format(report.ratio))
    print("  weights [[b11, b12], [b21, b22]] = {}".format(report.weights.tolist()))

    trajectory = hotstock_trajectory(periods)
    header = list(trajectory[0].keys())
    table = [header] + [[row[key] for key in header] for row in trajectory]
    payload = {
        "report": {
            "t": report.t,
            "universal_wealth": report.universal_wealth,
            "universal_1linear_wealth": one_linear,
            "hindsight_wealth": report.hindsight_wealth,
            "crp_hindsight_wealth": report.crp_hindsight_wealth,
            "ratio": report.ratio,
            "weights": report.weights.tolist(),
        },
        "trajectory": trajectory,
    }

    if cfg.output_path is not None:
        ubp.plugins.export(Document(payload, table), cfg.output_format, cfg.output_path)

    if history_path is not None:
        with open(history_path, "w", encoding="utf-8", newline="") as f:
            f.write(serialize_history(hotstock_history(periods)))
        logger.info("Wrote the hot-stock return table to %s", history_path)

    return EXIT_OK


def write_default_config(arguments, _config):
    config_location = arguments.location or ubp.config.config_location()

    if not os.path.exists(config_location) or arguments.yes or input(
        "Are you sure you want to overwrite the config at %s (Y/n)? " % config_location
    ) == "Y":
        print("Writing default configuration to", config_location)
        ubp.config.write_config(ubp.config.create_default_config(), config_location)

    return EXIT_OK


def _add_run_options(parser, samples=True):
    parser.add_argument("--input", required=True, help="CSV file of gross returns, one sub-period per row")
    parser.add_argument("--order", type=int, help="sub-periods per investment period (H, default 2)")
    parser.add_argument("--tol", type=float, help="Frank-Wolfe gap tolerance")
    parser.add_argument("--max-iter", dest="max_iter", type=int, help="Frank-Wolfe iteration limit")
    parser.add_argument("--output", help="write the full result to this file")
    parser.add_argument("--format", help="output format (json or csv)")
    if samples:
        parser.add_argument("--prior-alpha", dest="prior_alpha", type=float, help="Dirichlet prior concentration")
        parser.add_argument("--samples", type=int, help="number of Monte Carlo particles")
        parser.add_argument("--seed", type=int, help="random seed")
        parser.add_argument("--mode", choices=MODES, help="backtest engine")


def build_parser():
    parser = argparse.ArgumentParser(
        "ubp", description="ubp: universal H-linear portfolio selection"
    )

    parser.set_defaults(target=None)

    parser.add_argument(
        "-c", "--config", dest="config", help="specify the configuration file"
    )
    parser.add_argument(
        "-v", "--verbose", help="log progress to stderr", action="store_true"
    )

    subparsers = parser.add_subparsers(
        title="Available commands", metavar="<command>", prog="ubp"
    )

    # --- ubp backtest ---
    backtest_parser = subparsers.add_parser(
        "backtest", description="Run the universal portfolio through a return history",
        help="Run the universal portfolio through a return history"
    )
    backtest_parser.set_defaults(target=backtest)
    _add_run_options(backtest_parser)

    # --- ubp hindsight ---
    hindsight_parser = subparsers.add_parser(
        "hindsight", description="Find the best strategy in hindsight", help="Find the best strategy in hindsight"
    )
    hindsight_parser.set_defaults(target=hindsight)
    _add_run_options(hindsight_parser, samples=False)
    hindsight_parser.add_argument(
        "--exact-kelly", dest="exact_kelly", action="store_true",
        help="use the closed form for horse-race histories"
    )

    # --- ubp bounds ---
    bounds_parser = subparsers.add_parser(
        "bounds", description="Tabulate the competitive ratio lower bound", help="Tabulate the competitive ratio lower bound"
    )
    bounds_parser.set_defaults(target=bounds)
    bounds_parser.add_argument("--assets", type=int, nargs="+", default=[2], help="numbers of assets m")
    bounds_parser.add_argument("--order", dest="orders", type=int, nargs="+", default=[2], help="orders H")
    bounds_parser.add_argument("--periods", type=int, nargs="+", default=[0, 1, 10, 100, 1000], help="horizons T")
    bounds_parser.add_argument("--prior-alpha", dest="prior_alpha", type=float, help="Dirichlet prior concentration")
    bounds_parser.add_argument("--output", help="write the table to this file")
    bounds_parser.add_argument("--format", help="output format (json or csv)")

    # --- ubp example ---
    example_parser = subparsers.add_parser(
        "example", description="Reproduce a worked example", help="Reproduce a worked example"
    )
    example_parser.set_defaults(target=example)
    example_parser.add_argument("name", choices=["hot-stock"])
    example_parser.add_argument("--periods", type=int, default=12, help="number of periods t")
    example_parser.add_argument("--output", help="write the trajectory to this file")
    example_parser.add_argument("--format", help="output format (json or csv)")
    example_parser.add_argument("--history", help="also write the example's return table here, ready for ubp backtest")

    # --- ubp config ---
    config_parser = subparsers.add_parser(
        "config", description="Create the default configuration", help="Create the default configuration"
    )
    config_parser.set_defaults(target=write_default_config)
    config_parser.add_argument("location", nargs="?")
    config_parser.add_argument("-y", "--yes", action="store_true", help="overwrite without asking")

    return parser


def main(argv=None):
    parser = build_parser()
    arguments = parser.parse_args(argv)

    if arguments.target is None:
        parser.print_help()
        return EXIT_OK

    config_location = arguments.config or ubp.config.config_location()
    try:
        config = ubp.config.load_config(config_location)
    except configparser.Error as e:
        print("Configuration file is located at: " + config_location, file=sys.stderr)
        print("ubp Configuration Error: {}".format(e), file=sys.stderr)
        return EXIT_INPUT

    logging.basicConfig(
        level=logging.DEBUG if arguments.verbose else ubp.config.log_level(config),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        return arguments.target(arguments, config)
    except configparser.Error as e:
        print("ubp Configuration Error: {}".format(e), file=sys.stderr)
        return EXIT_INPUT
    except UBPError as e:
        print("ubp: error: {}".format(e), file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
