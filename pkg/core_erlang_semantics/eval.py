"""Fuel-bounded big-step evaluator.

``eval_expr`` builds the derivation tree of ``⟨Γ, Δ, e⟩ → v`` bottom-up, one
``DerivationNode`` per rule application. Every way a premise can fail is
raised as an ``EvalError`` inside the evaluator and returned as a
``Failure`` at the boundary.
"""
from contextlib import contextmanager
from dataclasses import dataclass
from enum import IntEnum
import logging
import sys
import threading
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from core_erlang_semantics.ast import (
    Atom,
    EApply,
    ECall,
    ECase,
    EFun,
    EFunSig,
    EList,
    ELet,
    ELetrec,
    ELiteral,
    EMap,
    ETuple,
    EVar,
    Expression,
    Integer,
    Path,
)
from core_erlang_semantics.config import config
from core_erlang_semantics.env import (
    EMPTY_CLOS,
    EMPTY_ENV,
    ArityMismatch,
    ClosureEnv,
    EnvKey,
    Environment,
    Var,
    add_bindings,
    append_funs_to_closure,
    append_funs_to_env,
    append_vars_to_env,
    get_env,
    get_value,
    render_closure_env,
    render_env,
)
from core_erlang_semantics.logs import log_processing
from core_erlang_semantics.match import match_clause
from core_erlang_semantics.parser import format_expr
from core_erlang_semantics.values import (
    Concrete,
    Value,
    VClosure,
    VList,
    VLiteral,
    VMap,
    VTuple,
    ff,
    render_value,
    tt,
    value_eq,
)

logger = logging.getLogger(__name__)


class Rule(IntEnum):
    LITERAL = 1
    VAR = 2
    FUNSIG = 3
    FUN = 4
    TUPLE = 5
    CASE = 6
    CALL = 7
    APPLY = 8
    LET = 9
    LETREC = 10
    MAP = 11
    LIST = 12


RULE_FOR_EXPRESSION = {
    ELiteral: Rule.LITERAL,
    EVar: Rule.VAR,
    EFunSig: Rule.FUNSIG,
    EFun: Rule.FUN,
    ETuple: Rule.TUPLE,
    ECase: Rule.CASE,
    ECall: Rule.CALL,
    EApply: Rule.APPLY,
    ELet: Rule.LET,
    ELetrec: Rule.LETREC,
    EMap: Rule.MAP,
    EList: Rule.LIST,
}


# Errors

class EvalError(Exception):
    def __init__(self, message: str, path: Path = ()):
        super().__init__(message)
        self.path = path

    @property
    def name(self) -> str:
        return type(self).__name__


class UnboundIdentifier(EvalError):
    def __init__(self, key: EnvKey, path: Path = ()):
        super().__init__(f"Unbound identifier {key}.", path)
        self.key = key


class NotAClosure(EvalError):
    def __init__(self, value: Value, path: Path = ()):
        super().__init__(f"Cannot apply {render_value(value)}.", path)
        self.value = value


class BadArity(EvalError):
    def __init__(self, expected: int, got: int, path: Path = ()):
        super().__init__(f"Expected {expected} arguments, got {got}.", path)
        self.expected = expected
        self.got = got


class NoMatchingClause(EvalError):
    def __init__(self, value: Value, path: Path = ()):
        super().__init__(f"No clause matches {render_value(value)}.", path)
        self.value = value


class NonBooleanGuard(EvalError):
    def __init__(self, value: Value, path: Path = ()):
        super().__init__(f"Guard evaluated to {render_value(value)}.", path)
        self.value = value


class LengthMismatch(EvalError):
    def __init__(self, site: str, path: Path = ()):
        super().__init__(f"Length mismatch in {site}.", path)
        self.site = site


class OutOfFuel(EvalError):
    def __init__(self, path: Path = ()):
        super().__init__("Out of fuel.", path)


# Derivations

@dataclass(frozen=True)
class NoMatch:
    clause: int


@dataclass(frozen=True)
class GuardFalse:
    clause: int
    guard: "DerivationNode"


@dataclass(frozen=True)
class CaseEvidence:
    chosen: int
    skipped: Tuple[Union[NoMatch, GuardFalse], ...]


@dataclass(frozen=True)
class DerivationNode:
    rule: Rule
    env: Environment
    clos: ClosureEnv
    expr: Expression
    result: Value
    premises: Tuple["DerivationNode", ...] = ()
    case_evidence: Optional[CaseEvidence] = None

    def height(self) -> int:
        """Longest chain of judgements, counting skipped-clause guard derivations."""
        deepest = 0
        stack = [(self, 1)]
        while stack:
            node, depth = stack.pop()
            deepest = max(deepest, depth)
            stack.extend((child, depth + 1) for child in node.children())
        return deepest

    def children(self) -> Tuple["DerivationNode", ...]:
        guards = ()
        if self.case_evidence is not None:
            guards = tuple(
                step.guard for step in self.case_evidence.skipped
                if isinstance(step, GuardFalse)
            )
        return self.premises + guards


@dataclass(frozen=True)
class EvalConfig:
    env: Environment
    clos: ClosureEnv
    expr: Expression
    fuel: int

    def __post_init__(self):
        if self.fuel < 0:
            raise ValueError(f"Fuel must be >= 0, got {self.fuel}.")


@dataclass(frozen=True)
class Success:
    value: Value
    derivation: DerivationNode


@dataclass(frozen=True)
class Failure:
    error: EvalError


EvalOutcome = Union[Success, Failure]


# Builtins used by ``call``

BADARITH = VLiteral(Atom("@badarith"))
UNDEF = VLiteral(Atom("@undef"))

Builtin = Callable[[Tuple[Value, ...]], Value]
_BUILTINS: Dict[str, Builtin] = {}


def builtin(fname: str) -> Callable[[Builtin], Builtin]:
    def register(func: Builtin) -> Builtin:
        _BUILTINS[fname] = func
        return func
    return register


def _integer(v: Value) -> Optional[int]:
    if isinstance(v, VLiteral) and isinstance(v.literal, Integer):
        return v.literal.value
    return None


@builtin("plus")
def _plus(vals: Tuple[Value, ...]) -> Value:
    operands = [_integer(v) for v in vals]
    if len(operands) != 2 or None in operands:
        return BADARITH
    return VLiteral(Integer(operands[0] + operands[1]))


def builtin_eval(fname: str, vals: Sequence[Value]) -> Value:
    func = _BUILTINS.get(fname)
    if func is None:
        return UNDEF
    return func(tuple(vals))


def plus_commutes(v: Value, w: Value) -> bool:
    return value_eq(builtin_eval("plus", [v, w]), builtin_eval("plus", [w, v]))


# Evaluator

_FRAMES_PER_LEVEL = 4

# The recursion limit is interpreter-wide: concurrent holders share one raised
# limit, which drops back to the original only when the last one leaves.
_headroom_lock = threading.Lock()
_headroom_requests: List[int] = []
_base_recursion_limit = sys.getrecursionlimit()


@contextmanager
def recursion_headroom(depth: int):
    """Raise the interpreter recursion limit enough for ``depth`` nested rules."""
    global _base_recursion_limit
    with _headroom_lock:
        if not _headroom_requests:
            _base_recursion_limit = sys.getrecursionlimit()
        needed = _base_recursion_limit + depth * _FRAMES_PER_LEVEL
        _headroom_requests.append(needed)
        sys.setrecursionlimit(max(_headroom_requests))
    try:
        yield
    finally:
        with _headroom_lock:
            _headroom_requests.remove(needed)
            sys.setrecursionlimit(max(_headroom_requests, default=_base_recursion_limit))


# Paths inside the evaluator are (parent, step) chains; only errors unwind them.
PathLink = Optional[Tuple["PathLink", Union[str, int]]]


def path_of(link: PathLink) -> Path:
    steps = []
    while link is not None:
        link, step = link
        steps.append(step)
    return tuple(reversed(steps))


class _Evaluator:
    def __init__(self):
        self._handlers = {
            ELiteral: self._literal,
            EVar: self._var,
            EFunSig: self._funsig,
            EFun: self._fun,
            ETuple: self._tuple,
            ECase: self._case,
            ECall: self._call,
            EApply: self._apply,
            ELet: self._let,
            ELetrec: self._letrec,
            EMap: self._map,
            EList: self._list,
        }

    def eval(self, e: Expression, env: Environment, clos: ClosureEnv, fuel: int, path: PathLink) -> DerivationNode:
        if fuel <= 0:
            raise OutOfFuel(path_of(path))
        handler = self._handlers.get(type(e))
        if handler is None:
            raise TypeError(f"Not an expression: {e!r}")
        return handler(e, env, clos, fuel - 1, path)

    def eval_all(
            self,
            exprs: Sequence[Expression],
            env: Environment,
            clos: ClosureEnv,
            fuel: int,
            path: PathLink,
            label: str = "",
        ) -> List[DerivationNode]:
        return [
            self.eval(e, env, clos, fuel, (path, f"{label}{i}" if label else i))
            for i, e in enumerate(exprs)
        ]

    @staticmethod
    def _node(rule, env, clos, e, result, premises=(), evidence=None) -> DerivationNode:
        return DerivationNode(rule, env, clos, e, result, tuple(premises), evidence)

    def _literal(self, e: ELiteral, env, clos, fuel, path):
        return self._node(Rule.LITERAL, env, clos, e, VLiteral(e.literal))

    def _var(self, e: EVar, env, clos, fuel, path):
        value = get_value(env, Var(e.name))
        if value is None:
            raise UnboundIdentifier(Var(e.name), path_of(path))
        return self._node(Rule.VAR, env, clos, e, value)

    def _funsig(self, e: EFunSig, env, clos, fuel, path):
        value = get_value(env, e.fid)
        if value is None:
            raise UnboundIdentifier(e.fid, path_of(path))
        return self._node(Rule.FUNSIG, env, clos, e, value)

    def _fun(self, e: EFun, env, clos, fuel, path):
        return self._node(Rule.FUN, env, clos, e, VClosure(Concrete(env), e.params, e.body))

    def _tuple(self, e: ETuple, env, clos, fuel, path):
        premises = self.eval_all(e.elements, env, clos, fuel, path)
        result = VTuple(tuple(p.result for p in premises))
        return self._node(Rule.TUPLE, env, clos, e, result, premises)

    def _list(self, e: EList, env, clos, fuel, path):
        head = self.eval(e.head, env, clos, fuel, (path, "head"))
        tail = self.eval(e.tail, env, clos, fuel, (path, "tail"))
        return self._node(Rule.LIST, env, clos, e, VList(head.result, tail.result), (head, tail))

    def _case(self, e: ECase, env, clos, fuel, path):
        scrutinee = self.eval(e.scrutinee, env, clos, fuel, (path, "scrutinee"))
        value = scrutinee.result
        skipped = []
        for i in range(len(e.clauses)):
            matched = match_clause(value, e.clauses, i)
            if matched is None:
                skipped.append(NoMatch(i))
                continue
            guard, body, bindings = matched
            extended = add_bindings(bindings, env)
            guard_node = self.eval(guard, extended, clos, fuel, (path, f"guard{i}"))
            if value_eq(guard_node.result, ff):
                skipped.append(GuardFalse(i, guard_node))
                continue
            if not value_eq(guard_node.result, tt):
                raise NonBooleanGuard(guard_node.result, path_of((path, f"guard{i}")))
            body_node = self.eval(body, extended, clos, fuel, (path, f"body{i}"))
            return self._node(
                Rule.CASE, env, clos, e, body_node.result,
                (scrutinee, guard_node, body_node),
                CaseEvidence(i, tuple(skipped)),
            )
        raise NoMatchingClause(value, path_of(path))

    def _call(self, e: ECall, env, clos, fuel, path):
        premises = self.eval_all(e.args, env, clos, fuel, path)
        result = builtin_eval(e.fname, [p.result for p in premises])
        return self._node(Rule.CALL, env, clos, e, result, premises)

    def _apply(self, e: EApply, env, clos, fuel, path):
        args = self.eval_all(e.args, env, clos, fuel, path)
        target = self.eval(e.target, env, clos, fuel, (path, "target"))
        closure = target.result
        if not isinstance(closure, VClosure):
            raise NotAClosure(closure, path_of((path, "target")))
        if len(closure.params) != len(args):
            raise BadArity(len(closure.params), len(args), path_of(path))
        body_env = append_vars_to_env(
            closure.params, [a.result for a in args], get_env(closure.ref, clos)
        )
        body = self.eval(closure.body, body_env, clos, fuel, (path, "closure"))
        return self._node(Rule.APPLY, env, clos, e, body.result, args + [target, body])

    def _let(self, e: ELet, env, clos, fuel, path):
        if len(e.vars) != len(e.binds):
            raise LengthMismatch("let", path_of(path))
        binds = self.eval_all(e.binds, env, clos, fuel, path)
        try:
            body_env = append_vars_to_env(e.vars, [b.result for b in binds], env)
        except ArityMismatch as exc:
            raise BadArity(exc.expected, exc.got, path_of(path)) from exc
        body = self.eval(e.body, body_env, clos, fuel, (path, "body"))
        return self._node(Rule.LET, env, clos, e, body.result, binds + [body])

    def _letrec(self, e: ELetrec, env, clos, fuel, path):
        if len(e.fnames) != len(e.funs):
            raise LengthMismatch("letrec", path_of(path))
        body_env = append_funs_to_env(e.fnames, e.funs, env)
        body_clos = append_funs_to_closure(e.fnames, clos, body_env)
        body = self.eval(e.body, body_env, body_clos, fuel, (path, "body"))
        return self._node(Rule.LETREC, env, clos, e, body.result, (body,))

    def _map(self, e: EMap, env, clos, fuel, path):
        if len(e.keys) != len(e.values):
            raise LengthMismatch("map", path_of(path))
        keys = self.eval_all(e.keys, env, clos, fuel, path, label="key")
        values = self.eval_all(e.values, env, clos, fuel, path, label="value")
        result = VMap(tuple(k.result for k in keys), tuple(v.result for v in values))
        return self._node(Rule.MAP, env, clos, e, result, keys + values)


_EVALUATOR = _Evaluator()


@log_processing
def eval_expr(cfg: EvalConfig) -> EvalOutcome:
    with recursion_headroom(cfg.fuel):
        try:
            node = _EVALUATOR.eval(cfg.expr, cfg.env, cfg.clos, cfg.fuel, None)
        except OutOfFuel as exc:
            logger.warning(f"Out of fuel after {cfg.fuel} nested rule applications.")
            return Failure(exc)
        except EvalError as exc:
            return Failure(exc)
    return Success(node.result, node)


def evaluate(
        expr: Expression,
        env: Environment = EMPTY_ENV,
        clos: ClosureEnv = EMPTY_CLOS,
        fuel: Optional[int] = None,
    ) -> EvalOutcome:
    return eval_expr(EvalConfig(
        env=env,
        clos=clos,
        expr=expr,
        fuel=config.default_fuel if fuel is None else fuel,
    ))


def render_derivation(d: DerivationNode) -> str:
    """Judgements of ``d`` one per line, premises indented below their conclusion."""
    lines = []
    stack = [(d, 0, "")]
    while stack:
        node, depth, note = stack.pop()
        lines.append(
            "  " * depth
            + f"⟨{render_env(node.env)}, {render_closure_env(node.clos)}, "
            + f"{format_expr(node.expr)}⟩ → {render_value(node.result)}"
            + f"  [{node.rule.name.lower()}{note}]"
        )
        below = []
        if node.case_evidence is not None:
            below += [
                (step.guard, depth + 1, f", clause {step.clause} guard false")
                for step in node.case_evidence.skipped
                if isinstance(step, GuardFalse)
            ]
        below += [(premise, depth + 1, "") for premise in node.premises]
        stack.extend(reversed(below))
    return "\n".join(lines)
