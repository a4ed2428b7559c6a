"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 parse/validation error,
3 equivalence disagreement.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .equiv import differential, sample_goals
from .interp import check_property_soundness, solve
from .linear import Store
from .properties import PropertySet, derive_properties, format_properties, parse_properties
from .specialize import Entry, SpecConfig, emit, specialize
from .syntax import CHCError, Program, parse_constraints, parse_goal, parse_program

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_DISAGREE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


class InputError(Exception):
    """An input problem already formatted with its file position."""


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as exc:
        raise InputError(f"{path}: cannot read file: {exc.strerror}") from None


def _located(path: str, exc: CHCError) -> InputError:
    if exc.line is None:
        return InputError(f"{path}: error: {exc.message}")
    return InputError(f"{path}:{exc.line}:{exc.column}: error: {exc.message}")


def _load_program(path: str) -> Program:
    text = _read(path)
    try:
        return parse_program(text)
    except CHCError as exc:
        raise _located(path, exc) from None


def _load_props(spec: str, p: Program) -> PropertySet:
    if spec == "auto":
        return derive_properties(p)
    text = _read(spec)
    try:
        return parse_properties(text, p)
    except CHCError as exc:
        raise _located(spec, exc) from None


def _parse_entry(text: Optional[str], p: Program) -> str:
    if text is None:
        raise UsageError("cfr: the --entry PRED/ARITY option is required")
    name, sep, arity = text.partition("/")
    if not sep or not arity.isdigit():
        raise UsageError(f"--entry expects PRED/ARITY, got {text!r}")
    if name not in p.predicates:
        raise InputError(f"error: unknown entry predicate {name}")
    if p.predicates[name] != int(arity):
        raise InputError(f"error: entry {text}: {name} has arity {p.predicates[name]}")
    return name


def _parse_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    try:
        if not sep:
            raise ValueError
        bounds = int(lo), int(hi)
    except ValueError:
        raise UsageError(f"--range expects LO:HI, got {text!r}") from None
    if bounds[0] > bounds[1]:
        raise UsageError(f"--range {text}: LO exceeds HI")
    return bounds


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cfr", description="Control-flow refinement of constrained Horn clauses.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def props_flag(p):
        p.add_argument("--props", default="auto", metavar="auto|FILE",
                       help="property set: derive automatically or read from FILE")

    refine = sub.add_parser("refine", help="emit the polyvariant refinement of a program")
    refine.add_argument("program")
    props_flag(refine)
    refine.add_argument("--entry", metavar="PRED/ARITY", help="entry predicate (required)")
    refine.add_argument("--entry-constraint", default="", metavar="CONSTRAINTS",
                        help="constraints over A1..Ak holding at entry, e.g. 'A1>0, A2>=A3'")
    refine.add_argument("--strengthen", choices=("on", "off"), default="on",
                        help="conjoin version properties into residual guards")
    refine.add_argument("--prefix", default="solve__", help="name prefix for versions")
    refine.add_argument("--annotate", action="store_true",
                        help="precede each version with a comment listing its properties")
    refine.add_argument("-o", "--output")

    run = sub.add_parser("run", help="run a ground goal in the mixed interpreter")
    run.add_argument("program")
    run.add_argument("goal")
    props_flag(run)
    run.add_argument("--max-steps", type=int, default=100000, help="call budget")
    run.add_argument("--trace", action="store_true", help="print the derivation")

    props = sub.add_parser("props", help="print the derived property set")
    props.add_argument("program")
    props.add_argument("-o", "--output")

    check = sub.add_parser("check-equiv", help="differential test of a refinement")
    check.add_argument("original")
    check.add_argument("refined")
    check.add_argument("--entry", required=True, metavar="PRED/ARITY")
    check.add_argument("--entry-version", default="solve__1", metavar="NAME")
    props_flag(check)
    check.add_argument("--seed", type=int, default=0)
    check.add_argument("--trials", type=int, default=200)
    check.add_argument("--range", default="-20:20", metavar="LO:HI",
                       help="argument range; write --range=LO:HI when LO is negative")
    check.add_argument("--max-steps", type=int, default=100000, help="call budget per run")
    return parser


def _write(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    except OSError as exc:
        raise InputError(f"{path}: cannot write file: {exc.strerror}") from None


def _cmd_refine(args) -> int:
    p = _load_program(args.program)
    psi = _load_props(args.props, p)
    pred = _parse_entry(args.entry, p)
    try:
        constraint = Store(parse_constraints(args.entry_constraint))
    except CHCError as exc:
        raise InputError(f"--entry-constraint: {exc}") from None
    cfg = SpecConfig(Entry(pred, constraint), strengthen=args.strengthen == "on",
                     naming_prefix=args.prefix)
    try:
        r = specialize(p, psi, cfg)
    except (CHCError, ValueError) as exc:
        raise InputError(f"error: {exc}") from None
    _write(emit(r, psi if args.annotate else None), args.output)
    return EXIT_OK


def _cmd_run(args) -> int:
    p = _load_program(args.program)
    psi = _load_props(args.props, p)
    try:
        goal = parse_goal(args.goal)
    except CHCError as exc:
        raise _located("<goal>", exc) from None
    if args.max_steps < 1:
        raise UsageError("--max-steps must be positive")
    try:
        outcome = solve(goal, psi, p, args.max_steps)
    except CHCError as exc:
        raise InputError(f"error: {exc}") from None
    if args.trace and outcome.trace is not None:
        sys.stdout.write(outcome.trace.format(psi))
    print(outcome.status.value)
    print(f"calls: {outcome.calls}")
    if outcome.trace is not None and not check_property_soundness(outcome.trace, psi):
        print("warning: property check failed on trace", file=sys.stderr)
    return EXIT_OK


def _cmd_props(args) -> int:
    p = _load_program(args.program)
    _write(format_properties(derive_properties(p), p.predicates), args.output)
    return EXIT_OK


def _cmd_check(args) -> int:
    original = _load_program(args.original)
    refined = _load_program(args.refined)
    psi = _load_props(args.props, original)
    pred = _parse_entry(args.entry, original)
    lo_hi = _parse_range(args.range)
    if args.trials < 0 or args.max_steps < 1:
        raise UsageError("--trials must be nonnegative and --max-steps positive")
    goals = sample_goals(pred, original.predicates[pred], lo_hi, args.trials, args.seed)
    try:
        report = differential(original, refined, args.entry_version, goals, psi, args.max_steps)
    except CHCError as exc:
        raise InputError(f"error: {exc}") from None
    sys.stdout.write(report.summary())
    return EXIT_OK if report.ok else EXIT_DISAGREE


COMMANDS = {
    "refine": _cmd_refine,
    "run": _cmd_run,
    "props": _cmd_props,
    "check-equiv": _cmd_check,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT


def entry_point() -> None:
    sys.exit(main())
