#!/usr/bin/env python3
"""
Koopman-von Neumann Laboratory

Runs classical (Koopman), quantum, hybrid and measurement-chain scenarios
on phase-space grids and checks their results against analytic, symbolic
and matrix references.
"""

import os
import sys
import json
import argparse

from src.logger import setup_logger, set_level
from src.config import load_scenario_config, resolve_output_dir
from src.kvn.defaults import defaults_for
from src.kvn.errors import EXIT_OK, EXIT_VERIFY_FAILED, KvnError, exit_code_for
from src.kvn.output import write_run
from src.kvn.scenarios import execute, explain
from src.kvn.verify import SUITES, all_passed, run_verify

# Setup logger
logger = setup_logger("main")


def run_command(args) -> int:
    """Run one scenario configuration and write its artifacts."""
    config = load_scenario_config(args.config)
    result, manifest = execute(config)
    directory = resolve_output_dir(config)
    paths = write_run(directory, manifest, result.columns, result.rows, result.summary, result.artifacts)
    verdicts = result.summary.get("verdicts", {})
    for name, verdict in verdicts.items():
        (logger.info if verdict else logger.warning)(f"Verdict {name}: {verdict}")
    print(f"Wrote {len(paths)} files to {directory}")
    return EXIT_OK


def verify_command(args) -> int:
    """Run the acceptance suites; exit 0 only if every criterion passes."""
    results = run_verify(args.suite, args.dt)
    for result in results:
        print(result.describe())
    passed = all_passed(results)
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


def explain_command(args) -> int:
    """Describe a scenario and print its default configuration."""
    print(explain(args.scenario))
    print(json.dumps(defaults_for(args.scenario), indent=4, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Koopman-von Neumann Laboratory")
    parser.add_argument("--log-level", type=str, default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
                        help="Set logging level")
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="Run a scenario configuration")
    run_parser.add_argument("config", type=str, help="Path to a JSON scenario configuration")
    run_parser.set_defaults(handler=run_command)

    verify_parser = commands.add_parser("verify", help="Run the acceptance suites")
    verify_parser.add_argument("suite", nargs="?", default="all", choices=["all"] + list(SUITES),
                               help="Suite to run")
    verify_parser.add_argument("--dt", type=float, default=None, help="Override the time step of grid suites")
    verify_parser.set_defaults(handler=verify_command)

    explain_parser = commands.add_parser("explain", help="Describe a scenario")
    explain_parser.add_argument("scenario", type=str, help="Scenario name")
    explain_parser.set_defaults(handler=explain_command)
    return parser


def main(argv=None) -> int:
    """Main entry point for the application"""
    # Ensure logs directory exists
    os.makedirs("logs", exist_ok=True)

    args = build_parser().parse_args(argv)
    set_level(args.log_level)

    try:
        return args.handler(args)
    except KeyboardInterrupt:
        logger.info("Stopped by user")
        return EXIT_VERIFY_FAILED
    except KvnError as e:
        code = exit_code_for(e)
        logger.error(f"{type(e).__name__}: {str(e)}")
        print(str(e), file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
