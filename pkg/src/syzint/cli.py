"""Command line entry point: ``syzint solve --input system.json``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import io
from .driver import STRATEGIES, SolutionCheckError, StrategyError, solve
from .expr import ParseError


def build_parser():
    p = argparse.ArgumentParser(prog="syzint", description="Simplify linear PDE systems.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="run a strategy on a system file")
    s.add_argument("--input", required=True, help="system file (JSON)")
    s.add_argument("--strategy", default=None,
                   help=f"one of {', '.join(STRATEGIES)} or a comma separated action list")
    s.add_argument("--trace", default=None, help="write one JSON line per step here")
    s.add_argument("--max-steps", type=int, default=None)
    s.add_argument("--ranking", choices=("total", "lex"), default=None)
    s.add_argument("--output", default=None, help="write the report here instead of stdout")
    s.add_argument("-v", "--verbose", action="store_true")
    c = sub.add_parser("canonical", help="print a system file with normalized equations")
    c.add_argument("--input", required=True)
    return p


def _solve(args):
    sf = io.load(args.input)
    opts = sf.options
    system = sf.to_system(ranking=args.ranking)
    result = solve(system,
                   strategy=args.strategy or opts.get("strategy", "syzygy"),
                   max_steps=args.max_steps or opts.get("max_steps", 200),
                   max_divergence_subset=opts.get("max_divergence_subset"))
    text = io.dumps_report(result)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            for entry in system.trace:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
    return result.exit_code


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "solve":
            return _solve(args)
        sys.stdout.write(io.dumps(io.load(args.input).canonical()))
        return 0
    except (OSError, ParseError, io.SystemFileError, StrategyError,
            SolutionCheckError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
