"""Command-line front end: synthesize, evaluate, and compare.

Commands
--------
synth  --input FILE [--mode crt|direct] [--verify] [--stats]
       [--output FILE] [--cap N]
eval   --term FILE --point "r1,r2,..."
check  --left FILE --right FILE --vars N

Exit codes: 0 success (check: functions equal), 1 check found a
difference, 2 malformed input, 3 invalid description / bad evaluation
domain, 4 membership-search cap exceeded.  Results go to stdout,
diagnostics to stderr; all output is deterministic.

Description files are JSON: ``{"vars": n, "expr": NODE}`` where NODE is
``{"affine": {"constant": INT, "coeffs": [INT x n]}}``, ``{"min": [NODE,
...]}`` or ``{"max": [NODE, ...]}`` (arrays non-empty, integers only,
unknown keys rejected).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .crt import (
    DEFAULT_CAP,
    SynthesisTrace,
    synthesize_crt,
    synthesize_direct,
)
from .errors import (
    CapExceededError,
    DescriptionError,
    DomainError,
    InvalidDescriptionError,
    NotCongruentError,
    TermSyntaxError,
)
from .pwl import Leaf, MaxOf, MinOf, PwlExpr, decide_eq, function_eq, pwl_arity
from .geometry import AffineForm, affine
from .terms import (
    Term,
    eval_term,
    max_var_index,
    parse_term,
    print_term,
    term_node_count,
    term_oplus_depth,
)

EXIT_OK = 0
EXIT_DIFFER = 1
EXIT_MALFORMED = 2
EXIT_INVALID = 3
EXIT_CAP = 4


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def description_from_obj(obj) -> tuple[int, PwlExpr]:
    """Validate a parsed JSON document and build the lattice expression."""
    if not isinstance(obj, dict) or set(obj.keys()) != {"vars", "expr"}:
        raise DescriptionError('top level must be {"vars": n, "expr": NODE}')
    arity = obj["vars"]
    if not _is_int(arity) or arity < 1:
        raise DescriptionError('"vars" must be an integer >= 1')

    def node(spec, path: str) -> PwlExpr:
        if not isinstance(spec, dict) or len(spec) != 1:
            raise DescriptionError(f"{path}: expected a single-key object")
        key, value = next(iter(spec.items()))
        if key == "affine":
            if not isinstance(value, dict) or set(value.keys()) != {
                "constant",
                "coeffs",
            }:
                raise DescriptionError(
                    f'{path}.affine: expected {{"constant": INT, "coeffs": [INT]}}'
                )
            constant = value["constant"]
            coeffs = value["coeffs"]
            if not _is_int(constant):
                raise DescriptionError(f"{path}.affine.constant: integer required")
            if (
                not isinstance(coeffs, list)
                or len(coeffs) != arity
                or not all(_is_int(c) for c in coeffs)
            ):
                raise DescriptionError(
                    f"{path}.affine.coeffs: expected {arity} integers"
                )
            return Leaf(affine(constant, coeffs))
        if key in ("min", "max"):
            if not isinstance(value, list) or not value:
                raise DescriptionError(f"{path}.{key}: expected a non-empty array")
            children = tuple(
                node(child, f"{path}.{key}[{i}]") for i, child in enumerate(value)
            )
            return MinOf(children) if key == "min" else MaxOf(children)
        raise DescriptionError(f"{path}: unknown node kind {key!r}")

    return arity, node(obj["expr"], "expr")


def load_description(path: str) -> tuple[int, PwlExpr]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as ex:
            raise DescriptionError(f"invalid JSON: {ex}") from ex
    return description_from_obj(obj)


def _point_str(point) -> str:
    return ",".join(str(c) for c in point)


def _fail(message: str, code: int) -> int:
    print(message, file=sys.stderr)
    return code


def _run_synth(args) -> int:
    try:
        arity, description = load_description(args.input)
    except (DescriptionError, OSError) as ex:
        return _fail(f"error: {ex}", EXIT_MALFORMED)
    trace = SynthesisTrace()
    try:
        if args.mode == "crt":
            term = synthesize_crt(description, cap=args.cap, trace=trace)
        else:
            term = synthesize_direct(description)
    except InvalidDescriptionError as ex:
        detail = f"invalid description: {ex}"
        if ex.witness is not None:
            detail += f" (witness {_point_str(ex.witness)})"
        return _fail(detail, EXIT_INVALID)
    except NotCongruentError as ex:
        return _fail(
            f"invalid description: region terms not congruent at "
            f"{_point_str(ex.witness)}",
            EXIT_INVALID,
        )
    except CapExceededError as ex:
        return _fail(f"error: {ex}", EXIT_CAP)
    # Certification runs inside the synthesizers (--verify documents the
    # default; there is deliberately no way to turn it off here).
    text = print_term(term) + "\n"
    if args.stats:
        print(
            f"nodes={term_node_count(term)} "
            f"oplus_depth={term_oplus_depth(term)} "
            f"regions={len(trace.groups)} "
            f"max_bound={trace.max_bound}",
            file=sys.stderr,
        )
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _run_eval(args) -> int:
    try:
        with open(args.term, "r", encoding="utf-8") as fh:
            term = parse_term(fh.read())
    except (TermSyntaxError, OSError) as ex:
        return _fail(f"error: {ex}", EXIT_MALFORMED)
    try:
        coords = [Fraction(tok) for tok in args.point.split(",")] if args.point else []
    except (ValueError, ZeroDivisionError) as ex:
        return _fail(f"error: bad point: {ex}", EXIT_MALFORMED)
    try:
        value = eval_term(term, coords)
    except DomainError as ex:
        return _fail(f"error: {ex}", EXIT_INVALID)
    print(value)
    return EXIT_OK


def _load_side(path: str, arity: int):
    """A term or a description, selected by file extension."""
    if path.endswith(".term"):
        with open(path, "r", encoding="utf-8") as fh:
            term = parse_term(fh.read())
        if max_var_index(term) > arity:
            raise DescriptionError(
                f"{path}: term uses more than {arity} variables"
            )
        return term
    if path.endswith(".json"):
        file_arity, description = load_description(path)
        if file_arity != arity:
            raise DescriptionError(
                f"{path}: description declares {file_arity} variables, expected {arity}"
            )
        return description
    raise DescriptionError(f"{path}: expected a .term or .json file")


def _run_check(args) -> int:
    if args.vars < 1:
        return _fail("error: --vars must be >= 1", EXIT_MALFORMED)
    try:
        left = _load_side(args.left, args.vars)
        right = _load_side(args.right, args.vars)
    except (DescriptionError, TermSyntaxError, OSError) as ex:
        return _fail(f"error: {ex}", EXIT_MALFORMED)
    if isinstance(left, PwlExpr) and isinstance(right, PwlExpr):
        verdict = decide_eq(left, right)
    else:
        verdict = function_eq(left, right, args.vars)
    if verdict:
        print("EQUAL")
        return EXIT_OK
    print(f"DIFFER at {_point_str(verdict.witness)}")
    return EXIT_DIFFER


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvsynth",
        description="Compile piecewise-linear descriptions on the unit cube "
        "into many-valued logic terms, with exact verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="synthesize a term from a description")
    p_synth.add_argument("--input", required=True, help="description JSON file")
    p_synth.add_argument("--mode", choices=("crt", "direct"), default="crt")
    p_synth.add_argument(
        "--verify",
        action="store_true",
        help="certify the output against the input (always on; flag "
        "documents intent)",
    )
    p_synth.add_argument("--stats", action="store_true", help="print size/region stats to stderr")
    p_synth.add_argument("--output", help="write the term here instead of stdout")
    p_synth.add_argument(
        "--cap",
        type=int,
        default=DEFAULT_CAP,
        help=f"membership search cap (default {DEFAULT_CAP})",
    )
    p_synth.set_defaults(run=_run_synth)

    p_eval = sub.add_parser("eval", help="evaluate a term at a rational point")
    p_eval.add_argument("--term", required=True, help="term text file")
    p_eval.add_argument(
        "--point", required=True, help='comma-separated rationals, e.g. "1/3,2/5"'
    )
    p_eval.set_defaults(run=_run_eval)

    p_check = sub.add_parser("check", help="decide function equality of two inputs")
    p_check.add_argument("--left", required=True)
    p_check.add_argument("--right", required=True)
    p_check.add_argument("--vars", required=True, type=int)
    p_check.set_defaults(run=_run_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.run(args)


if __name__ == "__main__":
    sys.exit(main())
