"""Command-line entry point: ``armtune simulate|tune|compare``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import harness
from .errors import ArmtuneError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="armtune",
        description="Simulate, GA-tune and compare PID controllers for a two-link arm.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI experiment file (defaults apply when omitted)")
    common.add_argument("--seed", type=int, help="GA seed, overrides [ga] seed")
    common.add_argument("--out", help="output directory, overrides [output] dir")
    common.add_argument("--workers", type=int, help="fitness evaluation threads")

    p = sub.add_parser("simulate", parents=[common], help="run one closed-loop simulation")
    p.add_argument("--gains", default="baseline",
                   help="'baseline', 'paper' or a gains file (default: baseline)")
    sub.add_parser("tune", parents=[common], help="optimise the gains with the GA")
    p = sub.add_parser("compare", parents=[common],
                       help="baseline vs tuned gains; tunes first unless --gains is given")
    p.add_argument("--gains", help="tuned gains: 'baseline', 'paper' or a gains file")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = harness.load_config(args.config) if args.config else harness.ExperimentConfig()
        cfg = harness.with_overrides(cfg, seed=args.seed, out=args.out, workers=args.workers)
        if args.command == "simulate":
            return harness.cmd_simulate(cfg, args.gains)
        if args.command == "tune":
            return harness.cmd_tune(cfg)
        return harness.cmd_compare(cfg, args.gains)
    except (ArmtuneError, OSError) as exc:
        print(f"armtune: error: {exc}", file=sys.stderr)
        return harness.EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
