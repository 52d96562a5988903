from argparse import ArgumentParser, ArgumentTypeError, Namespace
from dataclasses import dataclass
import logging
from pathlib import Path
import sys
from typing import Callable, Mapping, Optional, Tuple

from tabulate import tabulate

from core_erlang_semantics import __version__
from core_erlang_semantics.checker import CheckReport, validate
from core_erlang_semantics.config import config
from core_erlang_semantics.env import EMPTY_CLOS, EMPTY_ENV, Environment
from core_erlang_semantics.equiv import (
    BindingError,
    Equivalent,
    ManifestError,
    load_manifest,
    parse_env_bindings,
    render_report,
    run_suite,
)
from core_erlang_semantics.eval import (
    EvalConfig,
    EvalOutcome,
    Success,
    eval_expr,
    render_derivation,
)
from core_erlang_semantics.parser import ParseError, format_expr, parse_file
from core_erlang_semantics.serialize import (
    DerivationFormatError,
    dump_derivation,
    load_derivation,
)
from core_erlang_semantics.values import render_value

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_EVAL_ERROR = 2

SUBCOMMANDS = ("parse", "eval", "trace", "check", "equiv")


@dataclass(frozen=True)
class CliInvocation:
    subcommand: str
    inputs: Tuple[str, ...]
    fuel: int = config.default_fuel
    env_bindings: Optional[str] = None
    out: Optional[Path] = None
    tree: bool = False

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ValueError(f"Unknown subcommand {self.subcommand!r}.")
        if self.fuel <= 0:
            raise ValueError(f"Fuel must be positive, got {self.fuel}.")

    @classmethod
    def from_args(cls, args: Namespace) -> "CliInvocation":
        return cls(
            subcommand=args.services,
            inputs=tuple(args.inputs),
            fuel=getattr(args, "fuel", config.default_fuel),
            env_bindings=getattr(args, "env", None),
            out=getattr(args, "out", None),
            tree=getattr(args, "tree", False),
        )


def _err(message: str) -> None:
    print(message, file=sys.stderr)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise ArgumentTypeError(f"{text!r} is not an integer")
    if value <= 0:
        raise ArgumentTypeError(f"fuel must be positive, got {value}")
    return value


def _add_evaluation_arguments(parser) -> None:
    parser.add_argument(
        "--fuel",
        default=config.default_fuel,
        type=_positive_int,
        help=f"Maximum derivation depth. Default: {config.default_fuel}.",
        metavar="N",
    )
    parser.add_argument(
        "--env",
        default=None,
        help="Initial variable bindings, eg. 'X=5,Y=6'. Values must be literals.",
        metavar="BINDINGS",
    )


def _add_parse_subparsers(subparser_group) -> None:
    parser = subparser_group.add_parser(
        "parse",
        description="Parse .core files and print them back in canonical form",
        help="Parse and pretty-print",
    )
    parser.add_argument("inputs", nargs="+", metavar="FILE")


def _add_eval_subparsers(subparser_group) -> None:
    parser = subparser_group.add_parser(
        "eval",
        description="Evaluate .core files and print the resulting values",
        help="Evaluate",
    )
    parser.add_argument("inputs", nargs="+", metavar="FILE")
    _add_evaluation_arguments(parser)


def _add_trace_subparsers(subparser_group) -> None:
    parser = subparser_group.add_parser(
        "trace",
        description=(
            "Evaluate a .core file and write its derivation tree. "
            "Without --out, the tree goes to stdout."
        ),
        help="Evaluate and emit the derivation",
    )
    parser.add_argument("inputs", nargs=1, metavar="FILE")
    _add_evaluation_arguments(parser)
    parser.add_argument(
        "--out",
        default=None,
        type=Path,
        help="Write the .deriv file here.",
        metavar="PATH",
    )
    parser.add_argument(
        "--tree",
        action="store_true",
        help="Print the derivation as an indented tree instead of YAML.",
    )


def _add_check_subparsers(subparser_group) -> None:
    parser = subparser_group.add_parser(
        "check",
        description="Validate a serialized derivation ('-' reads stdin)",
        help="Validate a derivation",
    )
    parser.add_argument("inputs", nargs=1, metavar="DERIV")


def _add_equiv_subparsers(subparser_group) -> None:
    parser = subparser_group.add_parser(
        "equiv",
        description="Run an equivalence manifest",
        help="Check program equivalences",
    )
    parser.add_argument("inputs", nargs="+", metavar="MANIFEST")
    parser.add_argument(
        "--fuel",
        default=config.default_fuel,
        type=_positive_int,
        help=f"Fuel for every evaluation. Default: {config.default_fuel}.",
        metavar="N",
    )


def _outcome(inv: CliInvocation, path: str, env: Environment) -> EvalOutcome:
    return eval_expr(EvalConfig(
        env=env, clos=EMPTY_CLOS, expr=parse_file(Path(path)), fuel=inv.fuel,
    ))


def _initial_env(inv: CliInvocation) -> Environment:
    if inv.env_bindings is None:
        return EMPTY_ENV
    return parse_env_bindings(inv.env_bindings)


def _parse_service(inv: CliInvocation) -> int:
    status = EXIT_OK
    for path in inv.inputs:
        try:
            print(format_expr(parse_file(Path(path))))
        except (OSError, ParseError) as exc:
            _err(f"{path}: {exc}")
            status = EXIT_INVALID
    return status


def _eval_service(inv: CliInvocation) -> int:
    try:
        env = _initial_env(inv)
    except BindingError as exc:
        _err(f"--env: {exc}")
        return EXIT_INVALID
    status = EXIT_OK
    for path in inv.inputs:
        try:
            outcome = _outcome(inv, path, env)
        except (OSError, ParseError) as exc:
            _err(f"{path}: {exc}")
            status = max(status, EXIT_INVALID)
            continue
        if isinstance(outcome, Success):
            print(render_value(outcome.value))
        else:
            print(outcome.error.name)
            _err(f"{path}: {outcome.error}")
            status = EXIT_EVAL_ERROR
    return status


def _trace_service(inv: CliInvocation) -> int:
    path, = inv.inputs
    try:
        env = _initial_env(inv)
    except BindingError as exc:
        _err(f"--env: {exc}")
        return EXIT_INVALID
    try:
        outcome = _outcome(inv, path, env)
    except (OSError, ParseError) as exc:
        _err(f"{path}: {exc}")
        return EXIT_INVALID
    if not isinstance(outcome, Success):
        print(outcome.error.name)
        _err(f"{path}: {outcome.error}")
        return EXIT_EVAL_ERROR
    if inv.out is not None:
        inv.out.parent.mkdir(parents=True, exist_ok=True)
        with open(inv.out, "w", encoding="utf-8") as wf:
            wf.write(dump_derivation(outcome.derivation))
        logger.info(f"Derivation written to {inv.out}")
    if inv.tree:
        print(render_derivation(outcome.derivation))
    elif inv.out is None:
        sys.stdout.write(dump_derivation(outcome.derivation))
    else:
        print(render_value(outcome.value))
    return EXIT_OK


def _report_text(report: CheckReport) -> str:
    if report.valid:
        return "valid"
    table = tabulate(
        [
            ["/".join(map(str, v.path)) or "root",
             v.rule.name.lower() if v.rule is not None else "?",
             v.reason]
            for v in report.violations
        ],
        ["path", "rule", "reason"],
        tablefmt="plain",
    )
    return f"invalid ({len(report.violations)} violations)\n{table}"


def _check_service(inv: CliInvocation) -> int:
    path, = inv.inputs
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, "r", encoding="utf-8") as rf:
                text = rf.read()
        derivation = load_derivation(text)
    except (OSError, DerivationFormatError) as exc:
        _err(f"{path}: {exc}")
        return EXIT_INVALID
    report = validate(derivation)
    print(_report_text(report))
    return EXIT_OK if report.valid else EXIT_INVALID


def _equiv_service(inv: CliInvocation) -> int:
    results = []
    for path in inv.inputs:
        try:
            cases = load_manifest(Path(path))
        except (OSError, ManifestError) as exc:
            _err(str(exc))
            return EXIT_INVALID
        results.extend(run_suite(cases, inv.fuel))
    print(render_report(results))
    if all(isinstance(verdict, Equivalent) for _, verdict in results):
        return EXIT_OK
    return EXIT_INVALID


_AVAILABLE_SERVICES: Mapping[str, Callable[[CliInvocation], int]] = {
    "parse": _parse_service,
    "eval": _eval_service,
    "trace": _trace_service,
    "check": _check_service,
    "equiv": _equiv_service,
}


def run(inv: CliInvocation) -> int:
    return _AVAILABLE_SERVICES[inv.subcommand](inv)


def get_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="cesem",
        description="Core Erlang big-step semantics: evaluator, derivation checker and equivalence harness",
    )
    parser.add_argument("-v", "--version", action="version", version="%(prog)s " + str(__version__))
    parser.add_argument(
        "-q", "--quiet",
        action="store_true",
        help="Only log errors.",
    )
    subparsers = parser.add_subparsers(
        title="Available services",
        description="Services that cesem provides.",
        help="Additional help for available services",
        dest="services",
    )
    _add_parse_subparsers(subparsers)
    _add_eval_subparsers(subparsers)
    _add_trace_subparsers(subparsers)
    _add_check_subparsers(subparsers)
    _add_equiv_subparsers(subparsers)
    return parser


def main(argv=None) -> None:
    if argv is None:
        argv = sys.argv[1:]

    parser = get_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.ERROR if args.quiet else config.log_level,
        format='%(asctime)s %(levelname)-8s %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
        stream=sys.stderr,
    )
    if not args.services:
        parser.print_help()
        sys.exit(EXIT_INVALID)
    sys.exit(run(CliInvocation.from_args(args)))


if __name__ == '__main__':
    main()
