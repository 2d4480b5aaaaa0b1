"""fourier-mfg command-line entry point."""

from __future__ import annotations

import argparse
import logging
from collections.abc import Sequence

from fourier_mfg import __version__
from fourier_mfg.cli import register_all_commands
from fourier_mfg.config import settings
from fourier_mfg.logging_config import setup_logging

logger = logging.getLogger(__name__)


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fourier-mfg",
        description="Fourier-truncated mean field games and control on the torus.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", metavar="PATH", help="key = value run configuration file")
    parser.add_argument("--seed", type=_seed, metavar="U64", help="override the configured seed")
    parser.add_argument("--out", metavar="DIR", help=f"output root (default: {settings.output_root})")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one configuration key; repeatable",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    register_all_commands(subparsers)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, configure logging and dispatch; returns the process exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(settings.log_level, settings.log_format)
    logger.debug("Dispatching %s", args.command)
    return int(args.handler(args))


if __name__ == "__main__":
    raise SystemExit(main())
