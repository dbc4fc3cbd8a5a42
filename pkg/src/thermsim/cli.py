"""Command line front end: thermsim <scenario> --config PATH --out DIR."""

from __future__ import annotations

import argparse
import sys

from .config import KNOWN_SCENARIOS, ExperimentConfig
from .errors import ConfigError, StepFailure, ThermsimError
from .scenarios import run_scenario

EXIT_VERDICT_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_STEP_FAILURE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermsim",
        description="Run simulation and verification scenarios for the "
                    "nonlocal m-Laplacian heat model.")
    parser.add_argument("scenario", choices=KNOWN_SCENARIOS)
    parser.add_argument("--config", required=True, help="INI experiment config")
    parser.add_argument("--out", required=True, help="artifact output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallel workers for ensemble runs")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = ExperimentConfig.load(args.config, scenario=args.scenario,
                                       seed=args.seed)
        status = run_scenario(config, args.out, jobs=args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except StepFailure as exc:
        print(f"solver failure at t={exc.time}: {exc}", file=sys.stderr)
        return EXIT_STEP_FAILURE
    except ThermsimError as exc:
        # a scenario could not run as configured (empty cutoff window, law
        # violating its floor, ...): treat like a configuration problem
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    return status


if __name__ == "__main__":
    sys.exit(main())
