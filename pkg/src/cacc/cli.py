"""Command-line driver: ``cacc check|type|normalize|recursor``."""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .frontend import (
    FrontendError, TheoryRejected, Theory, format_function, format_rule,
    load_theory, parse_term, parse_type,
)
from .rewriting import DEFAULT_FUEL, FuelExhausted, normalize
from .schema import check_general_schema
from .signature import NotInductive, SignatureError, check_orders, generate_recursor, recursor_name
from .syntax import show
from .typecheck import Checker, TypingError

OK, VERDICT, USAGE = 0, 1, 2
BUNDLED = {"@paper": "paper.cac"}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def read_spec(path: str) -> tuple[str, str]:
    if path in BUNDLED:
        text = resources.files("cacc").joinpath("theories", BUNDLED[path]).read_text("utf-8")
        return path, text
    try:
        return path, Path(path).read_text("utf-8")
    except OSError as e:
        raise CliError(f"{path}: {e.strerror}", USAGE) from None


def located(path: str, err: FrontendError) -> str:
    return f"{path}:{err}"


def load(path: str, recursors: bool = True) -> Theory:
    name, text = read_spec(path)
    try:
        return load_theory(text, recursors)
    except TheoryRejected as e:
        raise CliError(located(name, e), VERDICT) from None
    except FrontendError as e:
        raise CliError(located(name, e), USAGE) from None


def read_term(theory: Theory, text: str, env_text: str, fuel: int, what: str):
    try:
        return parse_term(theory.signature, text, env_text, fuel)
    except FrontendError as e:
        raise CliError(f"<{what}>:{e}", USAGE) from None


def cmd_check(args, out) -> int:
    theory = load(args.spec)
    report = check_general_schema(theory.signature, args.assume_fo_terminating, args.fuel)
    if args.machine:
        print("\n".join(report.machine_lines()), file=out)
    else:
        print(report.to_text(), file=out)
    for r in report.rules:
        if not r.accepted:
            loc = theory.rule_locs.get(r.name)
            where = f"{args.spec}:{loc[0]}:{loc[1]}" if loc else args.spec
            print(f"{where}: rule {r.name}: {r.code}: {r.reason}", file=sys.stderr)
    return OK if report.passed else VERDICT


def cmd_type(args, out) -> int:
    theory = load(args.spec)
    env, term = read_term(theory, args.e, args.E or "", args.fuel, "term")
    checker = Checker(theory.signature, args.fuel)
    try:
        checker.validate_env(env)
        if args.against is not None:
            _, expected = read_term(theory, args.against, args.E or "", args.fuel, "against")
            derivation = checker.check_derive(env, term, expected)
        else:
            derivation = checker.derive(env, term)
    except TypingError as e:
        raise CliError(f"<term>: {e}", VERDICT) from None
    print(f"{show(term)} : {show(derivation.type)}", file=out)
    if args.explain:
        print(derivation, file=out)
    return OK


def cmd_normalize(args, out) -> int:
    theory = load(args.spec)
    _, term = read_term(theory, args.e, args.E or "", args.fuel, "term")
    trace = (lambda line: print(line, file=out)) if args.trace else None
    try:
        nf = normalize(theory.signature, term, args.fuel, args.strategy, trace)
    except FuelExhausted as e:
        raise CliError(f"<term>:1:1: {e}", VERDICT) from None
    print(show(nf), file=out)
    return OK


def cmd_recursor(args, out) -> int:
    theory = load(args.spec)
    sig = theory.signature
    try:
        target = parse_type(sig, args.to)
    except FrontendError as e:
        raise CliError(f"<type>:{e}", USAGE) from None
    if args.sort not in sig.sorts:
        raise CliError(f"<sort>:1:1: unknown sort {args.sort}", USAGE)
    verdict = check_orders(sig)
    if not verdict.ok and verdict.kind == "mutual-sorts":
        raise CliError(f"{args.spec}: {verdict}", VERDICT)
    try:
        decl, rules = generate_recursor(sig, args.sort, target, args.name or recursor_name(args.sort, target))
    except NotInductive as e:
        raise CliError(f"<sort>:1:1: {e}", VERDICT) from None
    except SignatureError as e:
        raise CliError(f"<sort>:1:1: {e}", USAGE) from None
    print(format_function(decl), file=out)
    for r in rules:
        print(format_rule(r), file=out)
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cacc", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("spec", help="specification file (.cac), or @paper for the bundled theory")
    common.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="reduction step budget")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="check the General Schema")
    c.add_argument("--assume-fo-terminating", action="store_true",
                   help="take termination of the first-order rules as given")
    c.add_argument("--machine", action="store_true", help="print only machine-readable lines")
    c.set_defaults(run=cmd_check)

    t = sub.add_parser("type", parents=[common], help="infer or check the type of a term")
    t.add_argument("-e", required=True, metavar="TERM")
    t.add_argument("-E", metavar="ENV", help="environment x:T, ...")
    t.add_argument("--against", metavar="TERM", help="expected type")
    t.add_argument("--explain", action="store_true", help="print the derivation tree")
    t.set_defaults(run=cmd_type)

    n = sub.add_parser("normalize", parents=[common], help="print the normal form of a term")
    n.add_argument("-e", required=True, metavar="TERM")
    n.add_argument("-E", metavar="ENV")
    n.add_argument("--trace", action="store_true", help="print every reduction step")
    n.add_argument("--strategy", choices=("outermost", "innermost"), default="outermost")
    n.set_defaults(run=cmd_normalize)

    r = sub.add_parser("recursor", parents=[common], help="print a generated recursor")
    r.add_argument("sort")
    r.add_argument("to", metavar="TYPE", help="output algebraic type")
    r.add_argument("--name")
    r.set_defaults(run=cmd_recursor)
    return p


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    if args.fuel <= 0:
        print("cacc: --fuel must be positive", file=sys.stderr)
        return USAGE
    try:
        return args.run(args, out)
    except CliError as e:
        print(f"cacc: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
