"""Command-line entry points.

  stablesim run <config> [--seed N] [--out DIR]
  stablesim sweep <config> --grid <file> [--out DIR]
  stablesim validate <config>
  stablesim presets list

Exit codes: 0 ok, 1 validation or parse failure, 2 audit failure,
3 I/O failure. <config> is a JSON file path or a preset name.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .config import (PRESETS, ParseError, ValidationError, load_config,
                     parse_config, preset_descriptions)
from .engine import AuditFailure, run, sweep

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_AUDIT = 2
EXIT_IO = 3


def _load_raw(path: str) -> dict:
    if path in PRESETS:
        return PRESETS[path]()
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such config file or preset: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as err:
        raise ParseError(f"{p}: line {err.lineno} column {err.colno}: {err.msg}") from err


def cmd_run(args) -> int:
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
    except (ParseError, ValidationError) as err:
        print(f"invalid config: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as err:
        print(str(err), file=sys.stderr)
        return EXIT_IO
    try:
        output = run(config)
    except AuditFailure as err:
        print(str(err), file=sys.stderr)
        return EXIT_AUDIT
    try:
        output.write(args.out)
    except OSError as err:
        print(f"cannot write outputs: {err}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote daily.csv, market.csv, analytics.csv, summary.json, "
          f"events.jsonl to {args.out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        raw = _load_raw(args.config)
        parse_config(raw)  # fail fast before the grid multiplies the error
        grid_raw = json.loads(Path(args.grid).read_text())
        grid = grid_raw.get("grid", grid_raw)
        if not isinstance(grid, dict):
            raise ValidationError("grid file must map parameter paths to value lists")
        for key, values in grid.items():
            if not isinstance(values, list):
                raise ValidationError(f"grid values for {key} must be a list")
    except (ParseError, ValidationError, json.JSONDecodeError) as err:
        print(f"invalid sweep input: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as err:
        print(str(err), file=sys.stderr)
        return EXIT_IO
    try:
        report = sweep(raw, grid, out_dir=args.out)
    except OSError as err:
        print(f"cannot write outputs: {err}", file=sys.stderr)
        return EXIT_IO
    failures = [p for p in report.points if p.error]
    print(f"swept {len(report.points)} points "
          f"({len(failures)} failed) into {args.out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        load_config(args.config)
    except (ParseError, ValidationError) as err:
        print(f"invalid: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as err:
        print(str(err), file=sys.stderr)
        return EXIT_IO
    print("ok")
    return EXIT_OK


def cmd_presets(args) -> int:
    if args.action != "list":
        print("unknown presets action; try: presets list", file=sys.stderr)
        return EXIT_VALIDATION
    for name, description in preset_descriptions().items():
        print(f"{name:20s} {description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stablesim",
        description="Deterministic stablecoin redemption-stress simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("config", help="config file or preset name")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default="out")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter grid")
    p_sweep.add_argument("config", help="config file or preset name")
    p_sweep.add_argument("--grid", required=True, help="JSON grid file")
    p_sweep.add_argument("--out", default="sweep_out")
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate", help="validate a config")
    p_val.add_argument("config")
    p_val.set_defaults(func=cmd_validate)

    p_presets = sub.add_parser("presets", help="preset catalog")
    p_presets.add_argument("action", nargs="?", default="list")
    p_presets.set_defaults(func=cmd_presets)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
