"""
Verify CLI
Command-line entry point: reads verify.toml, applies flag overrides and runs
the requested verification suite.

    verify --model complex-h2 --suite thm1 --samples 500 --seed 1 --output report.json
"""

import argparse
import logging
import os
import sys
from dataclasses import replace
from typing import List, Optional

from geometry.geometry_errors import ConfigurationError
from verify_manager import FORMATS, MODELS, SUITES, VerifyConfig, parse_tolerance, run_suite

DEFAULT_CONFIG = "./verify.toml"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="verify",
                                     description="Numerical checks of boundary-metric comparison bounds")
    parser.add_argument("--model", choices=MODELS)
    parser.add_argument("--suite", choices=list(SUITES) + ["all"])
    parser.add_argument("--samples", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--output")
    parser.add_argument("--format", choices=FORMATS)
    parser.add_argument("--tolerance", action="append", default=[], metavar="NAME=VALUE",
                        help="override a named tolerance (repeatable)")
    parser.add_argument("--config", help=f"TOML settings file (default {DEFAULT_CONFIG} when present)")
    parser.add_argument("--workers", type=int, help="worker processes for sample evaluation")
    parser.add_argument("--quiet", action="store_true", help="no progress bars, warnings only")
    return parser


def build_config(args: argparse.Namespace) -> VerifyConfig:
    """Defaults < TOML settings < command-line flags."""
    if args.config is not None:
        config = VerifyConfig.from_toml(args.config)
    elif os.path.exists(DEFAULT_CONFIG):
        config = VerifyConfig.from_toml(DEFAULT_CONFIG)
    else:
        config = VerifyConfig()
    overrides = {name: getattr(args, name) for name in ("model", "suite", "samples", "seed", "output",
                                                          "format", "workers")
                 if getattr(args, name) is not None}
    config = replace(config, quiet=args.quiet, **overrides)
    for text in args.tolerance:
        config = config.with_tolerances(parse_tolerance(text))
    return config


def main(argv: Optional[List[str]] = None) -> int:
    """
    Returns:
        0 all hard checks pass, 1 hard failure, 2 configuration error
    """
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO)
    try:
        config = build_config(args)
        result = run_suite(config)
    except ConfigurationError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return 2
    summary = result.summary
    print(f"Report written to {result.output}")
    print(f"Records: {summary['total_records']}  hard failures: {summary['hard_failures']}  "
          f"soft failures: {summary['soft_failures']}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
