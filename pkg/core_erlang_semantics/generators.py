"""Seeded generators of well-formed programs and values.

Generated expressions are closed over the variables they are told about,
never recurse (a function can only call functions defined before it) and so
always terminate. They avoid the few shapes whose printed form reads back as
a different tree (empty tuple and map expressions), so they are safe for
parse/format round trips.
"""
from dataclasses import dataclass, replace
import random
from typing import Dict, FrozenSet, Iterator, List, Sequence, Tuple

from core_erlang_semantics.ast import (
    Atom,
    Clause,
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
    EmptyList,
    EmptyMap,
    EmptyTuple,
    ETuple,
    EVar,
    Expression,
    FunDef,
    FunctionIdentifier,
    Integer,
    Literal,
    Pattern,
    PList,
    PLiteral,
    PTuple,
    PVar,
)
from core_erlang_semantics.config import config
from core_erlang_semantics.env import EMPTY_ENV, Environment, Var, insert_value
from core_erlang_semantics.values import (
    Concrete,
    Named,
    Value,
    VClosure,
    VList,
    VLiteral,
    VMap,
    VTuple,
)

VARIABLE_NAMES = ("A", "B", "C", "D", "E", "F", "G", "H", "W", "X", "Y", "Z")
FUNCTION_NAMES = ("f", "g", "h", "k")
ATOMS = ("ok", "error", "true", "false", "a", "b", "node", "it's")


@dataclass(frozen=True)
class _Scope:
    variables: FrozenSet[str] = frozenset()
    functions: Tuple[FunctionIdentifier, ...] = ()

    def bind(self, name: str) -> "_Scope":
        return replace(self, variables=self.variables | {name})

    def define(self, fid: FunctionIdentifier) -> "_Scope":
        return replace(self, functions=self.functions + (fid,))


class ExpressionGenerator:
    def __init__(
            self,
            seed: int = config.default_seed,
            max_depth: int = config.generator_depth,
            avoid: FrozenSet[str] = frozenset(),
            free: Sequence[str] = (),
        ):
        self.rng = random.Random(seed)
        self.max_depth = max_depth
        self.names = tuple(n for n in VARIABLE_NAMES if n not in avoid)
        self.free = tuple(free)
        self._defined = 0

    def expression(self) -> Expression:
        self._defined = 0
        scope = _Scope(variables=frozenset(self.free))
        return self._expr(self.max_depth, scope)

    def __iter__(self) -> Iterator[Expression]:
        while True:
            yield self.expression()

    # leaves

    def literal(self) -> Literal:
        return random_literal(self.rng)

    def _leaf(self, scope: _Scope) -> Expression:
        roll = self.rng.random()
        if scope.variables and roll < 0.4:
            return EVar(self.rng.choice(sorted(scope.variables)))
        if scope.functions and roll < 0.5:
            return EFunSig(self.rng.choice(scope.functions))
        return ELiteral(self.literal())

    # composites

    def _expr(self, depth: int, scope: _Scope) -> Expression:
        if depth <= 0 or self.rng.random() < 0.2:
            return self._leaf(scope)
        build = self.rng.choice((
            self._tuple, self._list, self._map, self._plus, self._let,
            self._apply_fun, self._apply_var, self._letrec, self._case,
        ))
        return build(depth - 1, scope)

    def _tuple(self, depth, scope):
        size = self.rng.randint(1, 3)
        return ETuple(tuple(self._expr(depth, scope) for _ in range(size)))

    def _list(self, depth, scope):
        tail = ELiteral(EmptyList()) if self.rng.random() < 0.6 else self._expr(depth, scope)
        return EList(self._expr(depth, scope), tail)

    def _map(self, depth, scope):
        size = self.rng.randint(1, 2)
        return EMap(
            tuple(self._expr(depth, scope) for _ in range(size)),
            tuple(self._expr(depth, scope) for _ in range(size)),
        )

    def _plus(self, depth, scope):
        return ECall("plus", (self._operand(depth, scope), self._operand(depth, scope)))

    def _operand(self, depth, scope):
        if self.rng.random() < 0.5:
            return ELiteral(Integer(self.rng.randint(-50, 50)))
        return self._expr(depth, scope)

    def _fresh_names(self, count: int) -> Tuple[str, ...]:
        return tuple(self.rng.sample(self.names, count))

    def _let(self, depth, scope):
        names = self._fresh_names(self.rng.randint(1, 2))
        binds = tuple(self._expr(depth, scope) for _ in names)
        inner = scope
        for name in names:
            inner = inner.bind(name)
        return ELet(names, binds, self._expr(depth, inner))

    def _fun(self, depth, scope) -> EFun:
        params = self._fresh_names(self.rng.randint(0, 2))
        inner = scope
        for name in params:
            inner = inner.bind(name)
        return EFun(params, self._expr(depth, inner))

    def _apply_fun(self, depth, scope):
        fun = self._fun(depth, scope)
        return EApply(fun, tuple(self._expr(depth, scope) for _ in fun.params))

    def _apply_var(self, depth, scope):
        name = self.rng.choice(self.names)
        fun = self._fun(depth, scope)
        args = tuple(self._expr(depth, scope) for _ in fun.params)
        return ELet((name,), (fun,), EApply(EVar(name), args))

    def _letrec(self, depth, scope):
        # function names are never reused within one program
        self._defined += 1
        name = f"{self.rng.choice(FUNCTION_NAMES)}{self._defined}"
        fun = self._fun(depth, scope)
        fid = FunctionIdentifier(name, len(fun.params))
        inner = scope.define(fid)
        if self.rng.random() < 0.7:
            body = EApply(EFunSig(fid), tuple(self._expr(depth, inner) for _ in fun.params))
        else:
            body = self._expr(depth, inner)
        return ELetrec((fid,), (FunDef(fun.params, fun.body),), body)

    def pattern(self, depth: int, names: List[str]) -> Pattern:
        roll = self.rng.random()
        if depth <= 0 or roll < 0.4:
            if names and self.rng.random() < 0.5:
                return PVar(names.pop())
            return PLiteral(self.literal())
        if roll < 0.7:
            return PList(self.pattern(depth - 1, names), self.pattern(depth - 1, names))
        size = self.rng.randint(1, 3)
        return PTuple(tuple(self.pattern(depth - 1, names) for _ in range(size)))

    def _clause(self, depth, scope, pattern: Pattern) -> Clause:
        inner = scope
        for name in _pattern_names(pattern):
            inner = inner.bind(name)
        guard = ELiteral(Atom(self.rng.choice(("true", "true", "false"))))
        return Clause(pattern, guard, self._expr(depth, inner))

    def _case(self, depth, scope):
        scrutinee = self._expr(depth, scope)
        clauses = []
        for _ in range(self.rng.randint(0, 2)):
            names = list(self._fresh_names(min(3, len(self.names))))
            clauses.append(self._clause(depth, scope, self.pattern(2, names)))
        catch_all = self._clause(depth, scope, PVar(self.rng.choice(self.names)))
        clauses.append(replace(catch_all, guard=ELiteral(Atom("true"))))
        return ECase(scrutinee, tuple(clauses))


def random_literal(rng: random.Random) -> Literal:
    roll = rng.random()
    if roll < 0.55:
        return Integer(rng.randint(-20, 20))
    if roll < 0.85:
        return Atom(rng.choice(ATOMS))
    return rng.choice((EmptyList, EmptyTuple, EmptyMap))()


def _pattern_names(p: Pattern) -> List[str]:
    if isinstance(p, PVar):
        return [p.name]
    if isinstance(p, PList):
        return _pattern_names(p.head) + _pattern_names(p.tail)
    if isinstance(p, PTuple):
        return [name for el in p.elements for name in _pattern_names(el)]
    return []


def generate_expressions(
        seed: int,
        n: int,
        max_depth: int = config.generator_depth,
        avoid: FrozenSet[str] = frozenset(),
        free: Sequence[str] = (),
    ) -> List[Expression]:
    gen = ExpressionGenerator(seed, max_depth, avoid, free)
    return [gen.expression() for _ in range(n)]


def random_environment(
        rng: random.Random,
        names: Sequence[str],
        max_depth: int = 2,
    ) -> Environment:
    """Bind a random subset of ``names`` to first-order values."""
    env = EMPTY_ENV
    for name in names:
        if rng.random() < 0.7:
            env = insert_value(env, Var(name), random_value(rng, max_depth, closures=False))
    return env


def random_value(rng: random.Random, max_depth: int = 3, closures: bool = True) -> Value:
    if max_depth <= 0 or rng.random() < 0.35:
        return VLiteral(random_literal(rng))
    kinds = ["list", "tuple", "map"] + (["closure"] if closures else [])
    kind = rng.choice(kinds)
    if kind == "list":
        return VList(random_value(rng, max_depth - 1, closures), random_value(rng, max_depth - 1, closures))
    if kind == "tuple":
        size = rng.randint(0, 3)
        return VTuple(tuple(random_value(rng, max_depth - 1, closures) for _ in range(size)))
    if kind == "map":
        size = rng.randint(0, 2)
        return VMap(
            tuple(random_value(rng, max_depth - 1, closures) for _ in range(size)),
            tuple(random_value(rng, max_depth - 1, closures) for _ in range(size)),
        )
    body = ExpressionGenerator(rng.randrange(2**32), max_depth=1, free=("X",)).expression()
    if rng.random() < 0.5:
        ref = Named(FunctionIdentifier(rng.choice(FUNCTION_NAMES), 1))
    else:
        ref = Concrete(random_environment(rng, ("Y", "Z"), 1))
    return VClosure(ref, ("X",), body)


def representative_values() -> Dict[str, List[Value]]:
    """Five hand-picked values for each value constructor."""
    identity = EVar("X")
    return {
        "literal": [
            VLiteral(Integer(0)),
            VLiteral(Integer(7)),
            VLiteral(Integer(-3)),
            VLiteral(Atom("ok")),
            VLiteral(EmptyList()),
        ],
        "closure": [
            VClosure(Concrete(EMPTY_ENV), ("X",), identity),
            VClosure(Concrete(EMPTY_ENV), (), ELiteral(Integer(5))),
            VClosure(Named(FunctionIdentifier("f", 1)), ("X",), identity),
            VClosure(Named(FunctionIdentifier("g", 0)), (), ELiteral(Atom("ok"))),
            VClosure(
                Concrete(insert_value(EMPTY_ENV, Var("Y"), VLiteral(Integer(1)))),
                ("X",), ECall("plus", (EVar("X"), EVar("Y"))),
            ),
        ],
        "list": [
            VList(VLiteral(Integer(1)), VLiteral(EmptyList())),
            VList(VLiteral(Integer(1)), VList(VLiteral(Integer(2)), VLiteral(EmptyList()))),
            VList(VLiteral(Atom("a")), VLiteral(Integer(3))),
            VList(VTuple(()), VLiteral(EmptyList())),
            VList(VLiteral(EmptyList()), VLiteral(EmptyList())),
        ],
        "tuple": [
            VTuple(()),
            VTuple((VLiteral(Integer(1)),)),
            VTuple((VLiteral(Integer(1)), VLiteral(Integer(2)))),
            VTuple((VLiteral(Atom("ok")), VLiteral(EmptyMap()))),
            VTuple((VTuple(()), VLiteral(Integer(-4)))),
        ],
        "map": [
            VMap((), ()),
            VMap((VLiteral(Integer(1)),), (VLiteral(Atom("one")),)),
            VMap((VLiteral(Atom("k")),), (VLiteral(Integer(2)),)),
            VMap(
                (VLiteral(Integer(1)), VLiteral(Integer(2))),
                (VLiteral(Integer(3)), VLiteral(Integer(4))),
            ),
            VMap((VTuple(()),), (VLiteral(EmptyList()),)),
        ],
    }
