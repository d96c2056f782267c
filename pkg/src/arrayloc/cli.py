"""Command-line front end for the localization-bound experiments.

Exit codes: 0 on success, 1 for configuration errors, 2 when a validation
(oracle or rank-table) check fails.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import EFIM_MODES, ConfigError, ExperimentConfig, load_scenario
from .experiments import (
    ResultTable,
    compare_arrays,
    emit_csv,
    monte_carlo_geometry,
    run_grid,
    run_optimize_anchors,
    run_oracle_check,
    run_point,
    run_rank_table,
    sweep_orientation,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CHECK_FAILED = 2

_SUBCOMMANDS = (
    "point",
    "grid",
    "sweep-orientation",
    "geometry-mc",
    "compare-arrays",
    "optimize-anchors",
    "rank-table",
    "oracle-check",
)

# subcommand name -> experiment type token used in config files
_CONFIG_TYPE = {
    "point": "point",
    "grid": "grid",
    "sweep-orientation": "orientation-sweep",
    "geometry-mc": "geometry-mc",
    "compare-arrays": "array-compare",
    "optimize-anchors": "optimize-anchors",
    "rank-table": "rank-table",
    "oracle-check": "oracle-check",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arrayloc",
        description=(
            "Fundamental localization accuracy bounds for far-field antenna-array "
            "agents: evaluate closed-form error bounds, reproduce contour/sweep/"
            "Monte-Carlo experiment pipelines, and validate every bound against an "
            "independent numerical Fisher-information oracle."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        cmd = sub.add_parser(name, help=f"run the {name} experiment")
        needs_config = name not in ("rank-table", "oracle-check")
        cmd.add_argument(
            "--config",
            required=needs_config,
            default=None,
            help="experiment configuration file" + ("" if needs_config else " (optional)"),
        )
        cmd.add_argument("--out", default=None, help="output CSV path (default: stdout)")
        cmd.add_argument("--seed", type=int, default=None, help="seed override")
        cmd.add_argument("--threads", type=int, default=1, help="worker processes")
        cmd.add_argument(
            "--mode",
            default=None,
            choices=[m for m in EFIM_MODES if m != "auto"],
            help="bound variant override",
        )
        cmd.add_argument(
            "--plot",
            nargs="?",
            const="",
            default=None,
            help="also render a figure (optional path; defaults next to the CSV)",
        )
    return parser


def _load(args: argparse.Namespace) -> Optional[ExperimentConfig]:
    if args.config is None:
        return None
    config = load_scenario(args.config)
    expected = _CONFIG_TYPE[args.command]
    if config.experiment != expected:
        raise ConfigError(
            f"config declares experiment type {config.experiment!r} but the "
            f"{args.command} subcommand expects {expected!r}"
        )
    import dataclasses

    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    if args.mode is not None:
        config = dataclasses.replace(config, mode=args.mode)
    return config


def _write_output(table: ResultTable, args: argparse.Namespace) -> None:
    if args.out:
        emit_csv(table, args.out)
    else:
        sys.stdout.write(",".join(table.columns) + "\n")
        from .experiments import _format_cell

        for row in table.rows:
            sys.stdout.write(",".join(_format_cell(v) for v in row) + "\n")
    if args.plot is not None:
        from .plotting import render_table

        if args.plot:
            figure_path = args.plot
        elif args.out:
            figure_path = str(Path(args.out).with_suffix(".png"))
        else:
            figure_path = f"{args.command}.png"
        render_table(table, _CONFIG_TYPE[args.command], figure_path)
        sys.stderr.write(f"figure written to {figure_path}\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load(args)
    except ValueError as exc:  # ConfigError and any construction-level rejection
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    except OSError as exc:
        sys.stderr.write(f"cannot read configuration: {exc}\n")
        return EXIT_CONFIG

    try:
        if args.command == "point":
            table = run_point(config)
        elif args.command == "grid":
            table = run_grid(config, threads=args.threads)
        elif args.command == "sweep-orientation":
            table = sweep_orientation(config)
        elif args.command == "geometry-mc":
            table = monte_carlo_geometry(config, threads=args.threads)
        elif args.command == "compare-arrays":
            table = compare_arrays(config)
        elif args.command == "optimize-anchors":
            table = run_optimize_anchors(config)
        elif args.command == "rank-table":
            table = run_rank_table(config, seed=args.seed if args.seed is not None else 20260810)
        elif args.command == "oracle-check":
            table = run_oracle_check(config)
        else:  # pragma: no cover - argparse prevents this
            raise AssertionError(args.command)
    except (ConfigError, ValueError) as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG

    _write_output(table, args)

    if args.command in ("oracle-check", "rank-table"):
        verdicts = table.column("verdict")
        if any(v != "pass" for v in verdicts):
            sys.stderr.write("validation FAILED\n")
            return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
