"""Command-line entry point.

    subplanck <scenario> [--config FILE] [--set key=value ...] [--seed N]
                         [--out DIR] [--plot] [--workers N]
"""
from __future__ import annotations

import argparse
import logging
import sys

from .config import SCENARIOS, parse_overrides, read_config_file, resolve
from .errors import ConfigError, GuardError
from .scenarios import run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GUARD = 3
EXIT_IO = 4

log = logging.getLogger("subplanck")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subplanck",
        description="Regenerate the displacement-metrology figures and table as CSV files.",
    )
    parser.add_argument("scenario", choices=SCENARIOS)
    parser.add_argument("--config", metavar="FILE", help="key = value configuration file")
    parser.add_argument("--set", dest="overrides", metavar="KEY=VALUE", action="append", default=[],
                        help="override a configuration key (repeatable; wins over --config)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--plot", action="store_true", help="also write an SVG figure")
    parser.add_argument("--workers", type=int, help="worker processes for grid evaluation")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        file_values = read_config_file(args.config) if args.config else {}
        overrides = parse_overrides(args.overrides)
        for key, value in (("seed", args.seed), ("output_dir", args.out), ("workers", args.workers)):
            if value is not None:
                overrides[key] = str(value)
        cfg = resolve(args.scenario, file_values, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        paths = run_scenario(cfg, plot=args.plot)
    except GuardError as exc:
        print(f"numerical guard failure: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in paths:
        log.info("wrote %s", path)
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
