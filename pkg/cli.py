"""
Command-line entry point for the stabilization toolkit.

Usage:
    python cli.py poles --L 1 --a 0.5 --beta-max 0.5 --alpha-max 60
    python cli.py instability --L 1 --a 0.5
    python cli.py open-loop --config run.cfg --mode nonlinear
    python cli.py verify

Every scenario key is accepted both in the --config file (`key = value`) and
as a flag (`--beta-max`, `--T-end`, ...); flags win. A previous run summary
JSON may be passed as --config to reproduce that run.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
import argparse
import sys
from typing import List, Optional

from config import KGSTAB_OUTPUT_DIR, LOG_LEVEL
from tools.scenario_config import SCENARIO_KEYS, SCENARIOS, load_config_file, resolve_config
from utils.errors import KgstabError
from utils.logging_config import get_logger, setup_logging

logger = get_logger("cli")

SCENARIO_HELP = {
    "poles": "List poles in the strip 0 <= Im w <= beta_max",
    "instability": "Show the uncontrolled linearized growth",
    "open-loop": "Open-loop stabilization with its uncontrolled twin",
    "closed-loop": "Periodic observer feedback",
    "verify": "Kernel, Hilbert and expansion checks",
    "sweep": "Spectral summary over a grid of (L, a)",
}


def flag_name(key: str) -> str:
    """
    Command-line flag of a scenario key.

    Example:
        >>> flag_name("beta_max"), flag_name("T_end")
        ('--beta-max', '--T-end')
    """
    return "--" + key.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kgstab", description="Radial Klein-Gordon boundary stabilization")
    subparsers = parser.add_subparsers(dest="scenario", required=True)
    for scenario in SCENARIOS:
        sub = subparsers.add_parser(scenario, help=SCENARIO_HELP[scenario])
        sub.add_argument("--config", help="Flat key = value file or a previous run summary JSON")
        sub.add_argument("--output-dir", default=KGSTAB_OUTPUT_DIR, help="Artifact directory")
        sub.add_argument("--log-level", default=LOG_LEVEL, help="DEBUG, INFO, WARNING, ERROR or CRITICAL")
        for key, (kind, default, help_text) in SCENARIO_KEYS.items():
            # Values stay strings here; scenario_config types them
            sub.add_argument(flag_name(key), dest=key, default=None, metavar=kind.upper(),
                             help=f"{help_text} (default: {default})")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        setup_logging(level=args.log_level)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    try:
        file_values = load_config_file(args.config) if args.config else {}
        flags = {key: getattr(args, key) for key in SCENARIO_KEYS}
        config = resolve_config(args.scenario, file_values, flags)
    except KgstabError as e:
        logger.error(f"{e.code}: {e}")
        return e.exit_code

    # Deferred so a bad config fails before the numerical stack loads
    from solvers.orchestrator import ScenarioOrchestrator

    orchestrator = ScenarioOrchestrator(log_level=args.log_level, output_dir=args.output_dir)
    result = orchestrator.run(config)
    if result["exit_code"] == 0:
        logger.info(result["message"])
    else:
        logger.error(result["message"])
    if "summary_path" in result:
        logger.info(f"Summary: {result['summary_path']}")
    return result["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
