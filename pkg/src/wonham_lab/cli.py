"""Command-line interface.

Subcommands:
  simulate   run a scenario config (JSON) and write CSV + manifest
  reproduce  run a bundled figure preset (fig1 | fig2:<n> | fig4:3 | fig4:6)
  selftest   run the acceptance suite, one pass/fail line per criterion
  bounds     recompute bound series from a stored trajectory CSV
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .experiments import (
    bounds_from_trajectories,
    parse_config,
    reproduce_figure,
    run_scenario,
    write_result,
)


def _cmd_simulate(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        cfg = parse_config(json.load(fh))
    result = run_scenario(cfg)
    paths = write_result(result, args.out)
    for p in paths:
        print(p)
    return 0


def _cmd_reproduce(args) -> int:
    for p in reproduce_figure(args.figure, args.out, paper_scale=args.paper_scale):
        print(p)
    return 0


def _cmd_selftest(args) -> int:
    from .acceptance import ALL_CRITERIA

    failed = 0
    for fn in ALL_CRITERIA:
        result = fn()
        print(result.line(), flush=True)
        failed += 0 if result.passed else 1
    print(f"{len(ALL_CRITERIA) - failed}/{len(ALL_CRITERIA)} criteria passed")
    return 1 if failed else 0


def _cmd_bounds(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    text = bounds_from_trajectories(cfg)
    out = args.out or "bounds.csv"
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    print(out)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="wonham-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario config file")
    p.add_argument("--config", required=True, help="JSON scenario config")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("reproduce", help="run a bundled figure preset")
    p.add_argument(
        "--figure", required=True, help="fig1 | fig2:<n> | fig4:3 | fig4:6"
    )
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument(
        "--paper-scale", action="store_true", help="use 300 paths instead of desk scale"
    )
    p.set_defaults(fn=_cmd_reproduce)

    p = sub.add_parser("selftest", help="run the acceptance suite")
    p.set_defaults(fn=_cmd_selftest)

    p = sub.add_parser("bounds", help="bounds only, from a stored trajectory CSV")
    p.add_argument("--config", required=True, help="JSON bounds config")
    p.add_argument("--out", default=None, help="output CSV path")
    p.set_defaults(fn=_cmd_bounds)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
