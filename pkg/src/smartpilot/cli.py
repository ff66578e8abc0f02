"""Command-line entry point: ``smartpilot {cdf,capacity-sweep,convergence,validate}``."""

import argparse
import logging
import sys
import time
from pathlib import Path

from . import report
from .config import format_config, parse_config, parse_value
from .errors import ConfigurationError
from .experiment import WORKERS_ENV, convergence_trace, run_experiment

log = logging.getLogger("smartpilot")

DEFAULT_STRATEGIES = ("random", "conventional", "spa", "optimal_p")
COMMAND_DEFAULTS = {
    # (antennas, trials)
    "cdf": ((32, 512), 10_000),
    "capacity-sweep": ((8, 16, 32, 64, 128, 256, 512), 1000),
    "convergence": ((32, 128, 512), 1000),
}


def _list_arg(name):
    def convert(text):
        try:
            return parse_value(name, text)
        except ConfigurationError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    return convert


def build_parser():
    parser = argparse.ArgumentParser(
        prog="smartpilot",
        description="Multi-cell massive MIMO uplink simulator for smart pilot assignment.",
        epilog=f"Worker processes: ${WORKERS_ENV} (default: all cores).",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat key = value config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--antennas", type=_list_arg("antennas"), help="comma list, e.g. 32,512")
    common.add_argument("--strategies", type=_list_arg("strategies"), help="comma list")
    common.add_argument("--out", type=str, help="output directory")
    common.add_argument("-v", "--verbose", action="count", default=None, dest="verbosity")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("cdf", parents=[common], help="CDF of the worst-user SINR")
    sub.add_parser("capacity-sweep", parents=[common], help="worst-user capacity versus M")
    sub.add_parser("convergence", parents=[common], help="sequential multi-cell SPA")
    v = sub.add_parser("validate", parents=[common], help="run the self-check suites")
    v.add_argument("--quick", action="store_true", help="reduced instance counts")
    return parser


def _setup_logging(verbosity):
    level = logging.WARNING - 10 * min(verbosity, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _run_validate(quick):
    from .checks import run_all

    results = run_all(quick=quick)
    for name, passed, detail in results:
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
    return 0 if all(passed for _, passed, _ in results) else 1


def run_command(command, config):
    antennas, trials = COMMAND_DEFAULTS[command]
    strategies = ("spa",) if command == "convergence" else DEFAULT_STRATEGIES
    scenario = config.scenario(antennas, trials, strategies)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    if command == "convergence":
        result = convergence_trace(scenario)
        report.write_convergence_csv(out / "convergence.csv", result)
        summary = report.convergence_summary(result)
    else:
        result = run_experiment(scenario)
        if command == "cdf":
            report.write_cdf_csv(out / "cdf.csv", result, config)
        else:
            report.write_capacity_csv(out / "capacity.csv", result)
        summary = report.experiment_summary(command, result)
    elapsed = time.perf_counter() - started
    if config.write_json:
        report.write_json(out / "summary.json", summary)
        report.write_json(out / "timing.json", {"command": command, "wall_clock_seconds": elapsed})
    (out / "config.txt").write_text(format_config(config), encoding="utf-8")
    log.info("%s finished in %.1f s, results in %s", command, elapsed, out)
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {
        "seed": args.seed,
        "trials": args.trials,
        "antennas": args.antennas,
        "strategies": args.strategies,
        "out": args.out,
        "verbosity": args.verbosity,
    }
    try:
        config = parse_config(args.config, overrides)
    except (ConfigurationError, OSError) as exc:
        print(f"smartpilot: configuration error: {exc}", file=sys.stderr)
        return 2
    _setup_logging(config.verbosity)
    if args.command == "validate":
        return _run_validate(args.quick)
    try:
        return run_command(args.command, config)
    except ConfigurationError as exc:
        print(f"smartpilot: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"smartpilot: I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
