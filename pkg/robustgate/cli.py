"""
Command-line interface

Subcommands:

    -   ``synth`` synthesizes a pulse and writes it with its report.
    -   ``validate`` simulates a pulse over a grid of parameters and writes the terminal errors.
    -   ``simulate`` writes the trajectory of a pulse at one parameter point.

Exit codes are ``0`` on success, ``1`` on bad input, and ``2`` when synthesis stagnates or an update cannot be solved.
"""


import argparse
import logging
import re
import sys
import warnings

from .config import SynthesisConfig
from .errors import ConfigError, ConvergenceError, InfeasibleSignalError, StagnationError
from .files import read_pulses, write_grid, write_pulses, write_report, write_trajectory
from .synthesis import simulate, synthesize, validate_grid


EXIT_OK = 0
EXIT_INPUT = 1
EXIT_STAGNATION = 2


def _error(message: str) -> int:
    print(f"robustgate: error: {message}", file=sys.stderr)
    return EXIT_INPUT


def _load(filename: str) -> SynthesisConfig:
    config = SynthesisConfig.open(filename)
    config.validate()
    return config


def cmd_synth(config_path: str, out_pulses: str, out_report: str) -> int:
    """
    Synthesizes a pulse from a run configuration

    :param config_path: The JSON run configuration, layered over the bundled defaults
    :param out_pulses: Where to write the pulse CSV
    :param out_report: Where to write the report JSON
    :return: The exit code
    """

    try:
        config = _load(config_path)
        pulse, report = synthesize(config)

    except StagnationError as e:
        print(f"robustgate: stagnation: {e}", file=sys.stderr)

        if e.pulse is not None:
            write_pulses(out_pulses, e.pulse)

        if e.report is not None:
            write_report(out_report, e.report, config)

        return EXIT_STAGNATION

    except ConvergenceError as e:
        print(f"robustgate: qp: {e}", file=sys.stderr)
        return EXIT_STAGNATION

    except (ConfigError, InfeasibleSignalError, TypeError, ValueError, OSError) as e:
        return _error(str(e))

    write_pulses(out_pulses, pulse)
    write_report(out_report, report, config)
    return EXIT_OK


def parse_grid(size: str) -> tuple[int, int]:
    """
    :param size: A grid size such as ``21x21``
    :return: The number of ``α`` and ``β`` nodes
    """

    if (match := re.fullmatch(r"\s*(\d+)\s*[xX×]\s*(\d+)\s*", size)) is None:
        raise ValueError(f"grid must look like NxM, got '{size}'")

    return int(match[1]), int(match[2])


def cmd_validate(config_path: str, pulse_path: str, grid: str, out_grid: str) -> int:
    """
    Validates a pulse over a uniform parameter grid

    :param config_path: The JSON run configuration
    :param pulse_path: The pulse CSV, with as many rows as the configuration has steps
    :param grid: The grid size, e.g. ``21x21``
    :param out_grid: Where to write the error grid CSV
    :return: The exit code
    """

    try:
        config = _load(config_path)
        pulse = read_pulses(pulse_path, config.dt)
        error_grid = validate_grid(pulse, config, *parse_grid(grid))

    except (ConfigError, TypeError, ValueError, OSError) as e:
        return _error(str(e))

    write_grid(out_grid, error_grid)
    logging.getLogger(__name__).info(f"Largest terminal error {error_grid.max_error:.6g}")
    return EXIT_OK


def cmd_simulate(config_path: str, pulse_path: str, alpha: float, beta: float, out_trajectory: str) -> int:
    """
    Simulates a pulse at one parameter point

    :param config_path: The JSON run configuration
    :param pulse_path: The pulse CSV
    :param alpha: The drift parameter, inside the configured interval
    :param beta: The control parameter, inside the configured interval
    :param out_trajectory: Where to write the trajectory CSV
    :return: The exit code
    """

    try:
        config = _load(config_path)
        pulse = read_pulses(pulse_path, config.dt)
        states = simulate(pulse, config, alpha, beta)

    except (ConfigError, TypeError, ValueError, OSError) as e:
        return _error(str(e))

    write_trajectory(out_trajectory, states, pulse.dt)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robustgate",
                                     description="Robust two-qubit gate pulse synthesis over a Legendre lift")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="log progress (repeat for debug output)")

    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="synthesize a pulse")
    synth.add_argument("--config", required=True, help="JSON run configuration")
    synth.add_argument("--out-pulses", required=True, help="pulse CSV to write")
    synth.add_argument("--out-report", required=True, help="report JSON to write")

    validate = commands.add_parser("validate", help="validate a pulse over a parameter grid")
    validate.add_argument("--config", required=True, help="JSON run configuration")
    validate.add_argument("--pulses", required=True, help="pulse CSV to read")
    validate.add_argument("--grid", default="21x21", help="grid size NxM (default: 21x21)")
    validate.add_argument("--out", required=True, help="error grid CSV to write")

    sim = commands.add_parser("simulate", help="simulate a pulse at one parameter point")
    sim.add_argument("--config", required=True, help="JSON run configuration")
    sim.add_argument("--pulses", required=True, help="pulse CSV to read")
    sim.add_argument("--alpha", type=float, default=1.0, help="drift parameter (default: 1)")
    sim.add_argument("--beta", type=float, default=1.0, help="control parameter (default: 1)")
    sim.add_argument("--out", required=True, help="trajectory CSV to write")

    return parser


def main(argv: list[str] = None) -> int:
    """
    Runs the command line

    :param argv: The arguments (defaults to ``sys.argv[1:]``)
    :return: The exit code
    """

    args = build_parser().parse_args(argv)

    if args.verbose:
        logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else logging.INFO,
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    with warnings.catch_warnings():
        warnings.simplefilter("default")

        match args.command:
            case "synth":
                return cmd_synth(args.config, args.out_pulses, args.out_report)

            case "validate":
                return cmd_validate(args.config, args.pulses, args.grid, args.out)

            case "simulate":
                return cmd_simulate(args.config, args.pulses, args.alpha, args.beta, args.out)


__all__ = ["main", "build_parser", "parse_grid", "cmd_synth", "cmd_validate", "cmd_simulate",
           "EXIT_OK", "EXIT_INPUT", "EXIT_STAGNATION"]
