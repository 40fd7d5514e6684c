"""Command-line interface: ``mobility <command> --scenario FILE``.

Exit codes: 0 success, 1 invalid scenario, 2 solver non-convergence,
3 infeasible scenario.
"""

from __future__ import annotations

import argparse
import sys

from ..errors import EmptyFeasibleSet, Infeasible, MobilityError, NonConvergence, ScenarioError
from .commands import COMMANDS, run_scenario
from .report import RENDERERS, to_text
from .scenario import load_scenario, validate_document

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGENCE, EXIT_INFEASIBLE = 0, 1, 2, 3


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mobility", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True)
        p.add_argument("--out")
        p.add_argument("--format", choices=sorted(RENDERERS), default=None)
        p.add_argument("--seed", type=_u64)
        p.add_argument("--tolerance", type=float)
        p.add_argument("--parallel", type=_positive_int, default=1)
    v = sub.add_parser("validate")
    v.add_argument("--scenario", required=True)
    return parser


def _validate(path: str) -> int:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"{path}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_INVALID
    diags = validate_document(text)
    for where, msg in diags:
        print(f"{where}: {msg}")
    if not diags:
        print("ok")
    return EXIT_INVALID if diags else EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        return _validate(args.scenario)
    try:
        scenario = load_scenario(args.scenario).with_overrides(args.seed, args.tolerance)
        report = run_scenario(args.command, scenario, args.parallel)
    except ScenarioError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID
    except NonConvergence as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (EmptyFeasibleSet, Infeasible) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (MobilityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    fmt = args.format or ("json" if args.out else "text")
    rendered = RENDERERS[fmt](report)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(rendered)
        if fmt != "text":
            sys.stdout.write(to_text(report))
    else:
        sys.stdout.write(rendered)
    return EXIT_OK
