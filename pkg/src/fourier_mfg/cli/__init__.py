"""Subcommand registration for the fourier-mfg CLI."""

from __future__ import annotations

import argparse


def register_all_commands(subparsers: argparse._SubParsersAction) -> None:
    """Register all subcommands with the top-level parser."""
    from fourier_mfg.cli.characteristics import register as reg_characteristics
    from fourier_mfg.cli.hjb_residual import register as reg_hjb_residual
    from fourier_mfg.cli.master_residual import register as reg_master_residual
    from fourier_mfg.cli.mollify import register as reg_mollify
    from fourier_mfg.cli.one_sided_lipschitz import register as reg_one_sided_lipschitz
    from fourier_mfg.cli.sample import register as reg_sample
    from fourier_mfg.cli.solve_mfg import register as reg_solve_mfg
    from fourier_mfg.cli.suite import register as reg_suite
    from fourier_mfg.cli.truncation_error import register as reg_truncation_error
    from fourier_mfg.cli.value import register as reg_value

    reg_solve_mfg(subparsers)
    reg_value(subparsers)
    reg_hjb_residual(subparsers)
    reg_master_residual(subparsers)
    reg_sample(subparsers)
    reg_mollify(subparsers)
    reg_characteristics(subparsers)
    reg_truncation_error(subparsers)
    reg_one_sided_lipschitz(subparsers)
    reg_suite(subparsers)
