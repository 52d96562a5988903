"""Program equivalence harness.

Two expressions are compared by evaluating both under the same Γ, Δ and fuel.
The four swap/function equivalences are available as case constructors and
as seeded instance generators.
"""
from dataclasses import dataclass, replace
import logging
from pathlib import Path
import random
from typing import List, Optional, Sequence, Tuple, Union

from tabulate import tabulate

from core_erlang_semantics.ast import (
    ECall,
    EApply,
    EFun,
    ELet,
    ELetrec,
    ELiteral,
    EVar,
    Expression,
    FunDef,
    FunctionIdentifier,
    EFunSig,
    Integer,
    free_variables,
)
from core_erlang_semantics.config import config
from core_erlang_semantics.env import (
    EMPTY_CLOS,
    EMPTY_ENV,
    ClosureEnv,
    Environment,
    Var,
    insert_value,
)
from core_erlang_semantics.eval import (
    EvalOutcome,
    Failure,
    OutOfFuel,
    Success,
    evaluate,
)
from core_erlang_semantics.generators import ExpressionGenerator, random_environment
from core_erlang_semantics.logs import log_processing
from core_erlang_semantics.parser import ParseError, parse_file, parse_literal
from core_erlang_semantics.values import (
    Value,
    VClosure,
    VList,
    VLiteral,
    VMap,
    VTuple,
    render_value,
    value_eq,
)

logger = logging.getLogger(__name__)

SWAPPED = frozenset({"X", "Y"})
SAMPLED_NAMES = ("Z", "W")


class ManifestError(ValueError):
    pass


class BindingError(ValueError):
    pass


@dataclass(frozen=True)
class Assumption:
    expr: Expression
    env: Environment
    expected: Value


@dataclass(frozen=True)
class EquivCase:
    name: str
    left: Expression
    right: Expression
    env: Environment = EMPTY_ENV
    clos: ClosureEnv = EMPTY_CLOS
    assumptions: Tuple[Assumption, ...] = ()


# Verdicts

@dataclass(frozen=True)
class Equivalent:
    value: Value


@dataclass(frozen=True)
class Divergent:
    left: Failure
    right: Failure


@dataclass(frozen=True)
class Distinct:
    left: EvalOutcome
    right: EvalOutcome


@dataclass(frozen=True)
class Vacuous:
    assumption: int
    outcome: EvalOutcome


EquivVerdict = Union[Equivalent, Divergent, Distinct, Vacuous]


def _diverged(outcome: EvalOutcome) -> bool:
    return isinstance(outcome, Failure) and isinstance(outcome.error, OutOfFuel)


@log_processing
def check_equiv(c: EquivCase, fuel: Optional[int] = None) -> EquivVerdict:
    for i, assumption in enumerate(c.assumptions):
        outcome = evaluate(assumption.expr, assumption.env, c.clos, fuel)
        if not (isinstance(outcome, Success) and value_eq(outcome.value, assumption.expected)):
            logger.warning(f"Case {c.name} is vacuous: assumption {i} does not hold.")
            return Vacuous(i, outcome)
    left = evaluate(c.left, c.env, c.clos, fuel)
    right = evaluate(c.right, c.env, c.clos, fuel)
    if isinstance(left, Success) and isinstance(right, Success) and value_eq(left.value, right.value):
        return Equivalent(left.value)
    if _diverged(left) and _diverged(right):
        return Divergent(left, right)
    return Distinct(left, right)


def mirrored(c: EquivCase) -> EquivCase:
    return replace(c, name=f"{c.name} (mirrored)", left=c.right, right=c.left)


def check_determinism(
        expr: Expression,
        fuel: Optional[int] = None,
        env: Environment = EMPTY_ENV,
        clos: ClosureEnv = EMPTY_CLOS,
    ) -> bool:
    """Evaluating with fuel F and 2F never yields two different values."""
    fuel = config.default_fuel if fuel is None else fuel
    once = evaluate(expr, env, clos, fuel)
    twice = evaluate(expr, env, clos, 2 * fuel)
    if isinstance(once, Success):
        return isinstance(twice, Success) and value_eq(once.value, twice.value)
    return True


# Cases

def _sum_xy() -> ECall:
    return ECall("plus", (EVar("X"), EVar("Y")))


def _nested_let(first: Expression, second: Expression) -> ELet:
    return ELet(("X",), (first,), ELet(("Y",), (second,), _sum_xy()))


def _simultaneous_let(first: Expression, second: Expression) -> ELet:
    return ELet(("X", "Y"), (first, second), _sum_xy())


def example1_case() -> EquivCase:
    five, six = ELiteral(Integer(5)), ELiteral(Integer(6))
    return EquivCase(
        "swap-values",
        left=_nested_let(five, six),
        right=_nested_let(six, five),
    )


def example2_case(
        e1: Expression,
        e2: Expression,
        env: Environment = EMPTY_ENV,
        clos: ClosureEnv = EMPTY_CLOS,
        fuel: Optional[int] = None,
        name: str = "swap-expressions",
    ) -> Optional[EquivCase]:
    """Case with its four assumptions, or None when e1 or e2 does not evaluate."""
    v1 = evaluate(e1, env, clos, fuel)
    v2 = evaluate(e2, env, clos, fuel)
    if not (isinstance(v1, Success) and isinstance(v2, Success)):
        return None
    x = Var("X")
    return EquivCase(
        name,
        left=_nested_let(e1, e2),
        right=_nested_let(e2, e1),
        env=env,
        clos=clos,
        assumptions=(
            Assumption(e1, env, v1.value),
            Assumption(e2, env, v2.value),
            Assumption(e1, insert_value(env, x, v2.value), v1.value),
            Assumption(e2, insert_value(env, x, v1.value), v2.value),
        ),
    )


def example3_case(
        e1: Expression,
        e2: Expression,
        env: Environment = EMPTY_ENV,
        clos: ClosureEnv = EMPTY_CLOS,
        name: str = "swap-simultaneous",
    ) -> EquivCase:
    return EquivCase(
        name,
        left=_simultaneous_let(e1, e2),
        right=_simultaneous_let(e2, e1),
        env=env,
        clos=clos,
    )


def example4_case(
        e: Expression,
        env: Environment = EMPTY_ENV,
        clos: ClosureEnv = EMPTY_CLOS,
        name: str = "function-wrap",
    ) -> EquivCase:
    wrapped = ELet(("X",), (EFun((), e),), EApply(EVar("X"), ()))
    return EquivCase(name, left=e, right=wrapped, env=env, clos=clos)


def divergent_program() -> ELetrec:
    fid = FunctionIdentifier("x", 0)
    call = EApply(EFunSig(fid), ())
    return ELetrec((fid,), (FunDef((), call),), call)


def _first_order(v: Value) -> bool:
    stack = [v]
    while stack:
        item = stack.pop()
        if isinstance(item, VClosure):
            return False
        if isinstance(item, VList):
            stack.extend((item.head, item.tail))
        elif isinstance(item, VTuple):
            stack.extend(item.elements)
        elif isinstance(item, VMap):
            stack.extend(item.keys + item.values)
    return True


def _instance_pairs(seed: int, n: int, fuel: Optional[int]):
    """Yield (e1, e2, Γ) with e1, e2 free of X and Y that evaluate under Γ."""
    rng = random.Random(seed)
    gen = ExpressionGenerator(
        rng.randrange(2 ** 32), avoid=SWAPPED, free=SAMPLED_NAMES,
    )
    produced = 0
    while produced < n:
        env = random_environment(rng, SAMPLED_NAMES)
        e1, e2 = gen.expression(), gen.expression()
        if (free_variables(e1) | free_variables(e2)) & SWAPPED:
            continue
        outcomes = [evaluate(e, env, EMPTY_CLOS, fuel) for e in (e1, e2)]
        # a closure value would capture the X binding of the other side
        if not all(isinstance(o, Success) and _first_order(o.value) for o in outcomes):
            continue
        produced += 1
        yield e1, e2, env


def generate_example2_instances(seed: int, n: int, fuel: Optional[int] = None) -> List[EquivCase]:
    cases = []
    for i, (e1, e2, env) in enumerate(_instance_pairs(seed, n, fuel)):
        cases.append(example2_case(e1, e2, env, fuel=fuel, name=f"swap-expressions-{i}"))
    return cases


def generate_example3_instances(seed: int, n: int, fuel: Optional[int] = None) -> List[EquivCase]:
    return [
        example3_case(e1, e2, env, name=f"swap-simultaneous-{i}")
        for i, (e1, e2, env) in enumerate(_instance_pairs(seed, n, fuel))
    ]


def generate_example4_instances(seed: int, n: int, fuel: Optional[int] = None) -> List[EquivCase]:
    rng = random.Random(seed)
    gen = ExpressionGenerator(rng.randrange(2 ** 32), free=SAMPLED_NAMES)
    cases = []
    while len(cases) < n:
        env = random_environment(rng, SAMPLED_NAMES)
        e = gen.expression()
        if isinstance(evaluate(e, env, EMPTY_CLOS, fuel), Success):
            cases.append(example4_case(e, env, name=f"function-wrap-{len(cases)}"))
    return cases


# Manifests and reports

def parse_env_bindings(text: str) -> Environment:
    """``X=5,Y='ok'`` as an environment; values are literals."""
    env = EMPTY_ENV
    for item in filter(None, (part.strip() for part in text.split(","))):
        name, sep, literal = item.partition("=")
        name = name.strip()
        if not sep or not name or not (name[0].isupper() or name[0] == "_"):
            raise BindingError(f"Expected Var=literal, got {item!r}.")
        try:
            value = VLiteral(parse_literal(literal))
        except ParseError as exc:
            raise BindingError(f"Bad literal in binding {item!r}: {exc}") from exc
        env = insert_value(env, Var(name), value)
    return env


def load_manifest(path: Path) -> List[EquivCase]:
    path = Path(path)
    cases = []
    with open(path, "r", encoding="utf-8") as mf:
        lines = mf.readlines()
    for lineno, line in enumerate(lines, start=1):
        line = line.split("%", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) not in (3, 4):
            raise ManifestError(
                f"{path}:{lineno}: expected 'name left.core right.core [bindings]'."
            )
        name, left, right = fields[:3]
        try:
            env = parse_env_bindings(fields[3]) if len(fields) == 4 else EMPTY_ENV
            cases.append(EquivCase(
                name,
                left=parse_file(path.parent / left),
                right=parse_file(path.parent / right),
                env=env,
            ))
        except (OSError, ParseError, ValueError) as exc:
            raise ManifestError(f"{path}:{lineno}: {exc}") from exc
    logger.info(f"Loaded {len(cases)} case(s) from {path}.")
    return cases


@log_processing
def run_suite(
        cases: Sequence[EquivCase],
        fuel: Optional[int] = None,
    ) -> List[Tuple[EquivCase, EquivVerdict]]:
    return [(case, check_equiv(case, fuel)) for case in cases]


def _outcome_text(outcome: EvalOutcome) -> str:
    if isinstance(outcome, Success):
        return render_value(outcome.value)
    return outcome.error.name


def verdict_row(case: EquivCase, verdict: EquivVerdict) -> List[str]:
    if isinstance(verdict, Equivalent):
        return [case.name, "equivalent", render_value(verdict.value)]
    if isinstance(verdict, Divergent):
        return [case.name, "divergent", "OutOfFuel"]
    if isinstance(verdict, Vacuous):
        return [case.name, "vacuous", f"assumption {verdict.assumption}"]
    return [
        case.name, "distinct",
        f"{_outcome_text(verdict.left)} / {_outcome_text(verdict.right)}",
    ]


def render_report(results: Sequence[Tuple[EquivCase, EquivVerdict]]) -> str:
    return tabulate(
        [verdict_row(case, verdict) for case, verdict in results],
        ["case", "verdict", "value"],
        tablefmt="plain",
    )
