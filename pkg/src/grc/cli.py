"""``grc`` command line: analyze circuits, run the law suite, aggregate and lift files."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .circuit import aggregate_cmd, analyze, lift_cmd, parse_circuit, serialize
from .entropy import DEFAULT_TOL
from .errors import GrcError
from .laws import LawConfig, run_laws

EXIT_OK, EXIT_FINDING, EXIT_INPUT = 0, 1, 2


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="grc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="per-step entropy ledgers and reversibility verdicts")
    p.add_argument("file", type=Path)
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.add_argument("--tol", type=_positive_float, default=DEFAULT_TOL)
    p.add_argument("--base", type=_positive_float, default=2.0, help="logarithm base (default 2: bits)")
    p.add_argument("--lenient", action="store_true", help="report condrev as n/a on nondeterministic aggregates")

    p = sub.add_parser("laws", help="run the randomised law suite")
    p.add_argument("--cases", type=int, default=500)
    p.add_argument("--max-dim", type=int, default=5)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tol", type=_positive_float, default=DEFAULT_TOL)
    p.add_argument("--only", action="append", default=[], metavar="PREFIX", help="run laws whose id starts with PREFIX")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("aggregate", help="write the computational circuit of a physical one")
    p.add_argument("file", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)

    p = sub.add_parser("lift", help="write a physical encoding of a computational circuit")
    p.add_argument("file", type=Path)
    p.add_argument("--multiplicity", type=int, required=True)
    p.add_argument("-o", "--output", type=Path, required=True)
    return parser


def _analyze(args) -> int:
    if args.base == 1:
        raise GrcError("logarithm base must differ from 1")
    result = analyze(parse_circuit(args.file), tol=args.tol, base=args.base, lenient=args.lenient)
    if args.json:
        sys.stdout.write(json.dumps(result.to_json(), indent=2) + "\n")
    else:
        sys.stdout.write(result.to_text())
    return EXIT_FINDING if result.exit_code else EXIT_OK


def _laws(args) -> int:
    try:
        config = LawConfig(args.cases, args.max_dim, args.seed, args.tol, tuple(args.only))
    except ValueError as exc:
        raise GrcError(str(exc)) from None
    report = run_laws(config)
    sys.stdout.write(report.dumps() if args.json else report.to_text())
    return EXIT_OK if report.ok else EXIT_FINDING


def _aggregate(args) -> int:
    args.output.write_text(serialize(aggregate_cmd(parse_circuit(args.file))), encoding="utf-8")
    return EXIT_OK


def _lift(args) -> int:
    args.output.write_text(serialize(lift_cmd(parse_circuit(args.file), args.multiplicity)), encoding="utf-8")
    return EXIT_OK


COMMANDS = {"analyze": _analyze, "laws": _laws, "aggregate": _aggregate, "lift": _lift}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (GrcError, OSError) as exc:
        print(f"grc {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
