"""Abstract syntax of the sequential Core Erlang subset.

Every node is a frozen dataclass whose sequence fields are tuples, so trees
are immutable, hashable and compared structurally with ``==``.
"""
from dataclasses import dataclass
from typing import FrozenSet, List, Tuple, Union


# Literals

@dataclass(frozen=True)
class Atom:
    text: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("Atom text must be non-empty.")


@dataclass(frozen=True)
class Integer:
    value: int


@dataclass(frozen=True)
class EmptyList:
    pass


@dataclass(frozen=True)
class EmptyTuple:
    pass


@dataclass(frozen=True)
class EmptyMap:
    pass


Literal = Union[Atom, Integer, EmptyList, EmptyTuple, EmptyMap]


# Patterns

@dataclass(frozen=True)
class PVar:
    name: str


@dataclass(frozen=True)
class PLiteral:
    literal: Literal


@dataclass(frozen=True)
class PList:
    head: "Pattern"
    tail: "Pattern"


@dataclass(frozen=True)
class PTuple:
    elements: Tuple["Pattern", ...]


Pattern = Union[PVar, PLiteral, PList, PTuple]


@dataclass(frozen=True, order=True)
class FunctionIdentifier:
    name: str
    arity: int

    def __post_init__(self):
        if not self.name:
            raise ValueError("Function identifier name must be non-empty.")
        if self.arity < 0:
            raise ValueError(
                f"Function identifier arity must be >= 0, got {self.arity}."
            )

    def __str__(self):
        return f"'{self.name}'/{self.arity}"


# Expressions

@dataclass(frozen=True)
class ELiteral:
    literal: Literal


@dataclass(frozen=True)
class EVar:
    name: str


@dataclass(frozen=True)
class EFunSig:
    fid: FunctionIdentifier


@dataclass(frozen=True)
class EFun:
    params: Tuple[str, ...]
    body: "Expression"


@dataclass(frozen=True)
class EList:
    head: "Expression"
    tail: "Expression"


@dataclass(frozen=True)
class ETuple:
    elements: Tuple["Expression", ...]


@dataclass(frozen=True)
class ECall:
    fname: str
    args: Tuple["Expression", ...]


@dataclass(frozen=True)
class EApply:
    target: "Expression"
    args: Tuple["Expression", ...]


@dataclass(frozen=True)
class Clause:
    pattern: Pattern
    guard: "Expression"
    body: "Expression"


@dataclass(frozen=True)
class ECase:
    scrutinee: "Expression"
    clauses: Tuple[Clause, ...]


@dataclass(frozen=True)
class ELet:
    vars: Tuple[str, ...]
    binds: Tuple["Expression", ...]
    body: "Expression"


@dataclass(frozen=True)
class FunDef:
    params: Tuple[str, ...]
    body: "Expression"


@dataclass(frozen=True)
class ELetrec:
    fnames: Tuple[FunctionIdentifier, ...]
    funs: Tuple[FunDef, ...]
    body: "Expression"


@dataclass(frozen=True)
class EMap:
    keys: Tuple["Expression", ...]
    values: Tuple["Expression", ...]


Expression = Union[
    ELiteral, EVar, EFunSig, EFun, EList, ETuple, ECall, EApply, ECase,
    ELet, ELetrec, EMap,
]

Identifier = Union[str, FunctionIdentifier]
Path = Tuple[Union[str, int], ...]


def pattern_variables(p: Pattern) -> List[str]:
    """Variables of ``p`` in left-to-right order, repeats included."""
    if isinstance(p, PVar):
        return [p.name]
    if isinstance(p, PLiteral):
        return []
    if isinstance(p, PList):
        return pattern_variables(p.head) + pattern_variables(p.tail)
    if isinstance(p, PTuple):
        return [name for el in p.elements for name in pattern_variables(el)]
    raise TypeError(f"Not a pattern: {p!r}")


def is_linear(p: Pattern) -> bool:
    names = pattern_variables(p)
    return len(names) == len(set(names))


# Static checks

@dataclass(frozen=True)
class Diagnostic:
    path: Path
    reason: str
    detail: str = ""

    def __str__(self):
        location = "/".join(str(step) for step in self.path) or "<root>"
        return f"{location}: {self.reason} {self.detail}".rstrip()


LENGTH_MISMATCH = "LengthMismatch"
ARITY_MISMATCH = "ArityMismatch"
NONLINEAR_PATTERN = "NonLinearPattern"
DUPLICATE_PARAMETER = "DuplicateParameter"


def children(e: Expression) -> List[Tuple[Union[str, int], Expression]]:
    """Direct sub-expressions of ``e`` with the path step leading to each."""
    if isinstance(e, (ELiteral, EVar, EFunSig)):
        return []
    if isinstance(e, EFun):
        return [("body", e.body)]
    if isinstance(e, EList):
        return [("head", e.head), ("tail", e.tail)]
    if isinstance(e, ETuple):
        return list(enumerate(e.elements))
    if isinstance(e, ECall):
        return list(enumerate(e.args))
    if isinstance(e, EApply):
        return [("target", e.target)] + list(enumerate(e.args))
    if isinstance(e, ECase):
        steps = [("scrutinee", e.scrutinee)]
        for i, clause in enumerate(e.clauses):
            steps.append((f"guard{i}", clause.guard))
            steps.append((f"body{i}", clause.body))
        return steps
    if isinstance(e, ELet):
        return list(enumerate(e.binds)) + [("body", e.body)]
    if isinstance(e, ELetrec):
        return [(f"fun{i}", fun.body) for i, fun in enumerate(e.funs)] + [("body", e.body)]
    if isinstance(e, EMap):
        return (
            [(f"key{i}", k) for i, k in enumerate(e.keys)]
            + [(f"value{i}", v) for i, v in enumerate(e.values)]
        )
    raise TypeError(f"Not an expression: {e!r}")


def _node_diagnostics(e: Expression, path: Path) -> List[Diagnostic]:
    found = []
    if isinstance(e, EFun) and len(set(e.params)) != len(e.params):
        found.append(Diagnostic(path, DUPLICATE_PARAMETER, ",".join(e.params)))
    elif isinstance(e, ELet) and len(e.vars) != len(e.binds):
        found.append(Diagnostic(
            path, LENGTH_MISMATCH, f"{len(e.vars)} vars, {len(e.binds)} binds"
        ))
    elif isinstance(e, ELetrec):
        if len(e.fnames) != len(e.funs):
            found.append(Diagnostic(
                path, LENGTH_MISMATCH, f"{len(e.fnames)} fnames, {len(e.funs)} funs"
            ))
        for i, (fid, fun) in enumerate(zip(e.fnames, e.funs)):
            if len(fun.params) != fid.arity:
                found.append(Diagnostic(
                    path + (f"fun{i}",), ARITY_MISMATCH,
                    f"{fid} has {len(fun.params)} parameters",
                ))
            if len(set(fun.params)) != len(fun.params):
                found.append(Diagnostic(
                    path + (f"fun{i}",), DUPLICATE_PARAMETER, ",".join(fun.params)
                ))
    elif isinstance(e, EMap) and len(e.keys) != len(e.values):
        found.append(Diagnostic(
            path, LENGTH_MISMATCH, f"{len(e.keys)} keys, {len(e.values)} values"
        ))
    elif isinstance(e, ECase):
        for i, clause in enumerate(e.clauses):
            if not is_linear(clause.pattern):
                found.append(Diagnostic(
                    path + (f"clause{i}",), NONLINEAR_PATTERN,
                    ",".join(pattern_variables(clause.pattern)),
                ))
    return found


def well_formed(e: Expression) -> List[Diagnostic]:
    """Collect every structural problem of ``e``; an empty list means clean."""
    diagnostics = []
    stack = [(e, ())]
    while stack:
        node, path = stack.pop()
        diagnostics.extend(_node_diagnostics(node, path))
        for step, child in reversed(children(node)):
            stack.append((child, path + (step,)))
    return diagnostics


def free_variables(e: Expression) -> FrozenSet[Identifier]:
    """Variable names and function identifiers referenced but not bound in ``e``."""
    if isinstance(e, ELiteral):
        return frozenset()
    if isinstance(e, EVar):
        return frozenset({e.name})
    if isinstance(e, EFunSig):
        return frozenset({e.fid})
    if isinstance(e, EFun):
        return free_variables(e.body) - set(e.params)
    if isinstance(e, EList):
        return free_variables(e.head) | free_variables(e.tail)
    if isinstance(e, (ETuple, ECall)):
        items = e.elements if isinstance(e, ETuple) else e.args
        return frozenset().union(*(free_variables(x) for x in items))
    if isinstance(e, EApply):
        return free_variables(e.target).union(*(free_variables(x) for x in e.args))
    if isinstance(e, ECase):
        found = set(free_variables(e.scrutinee))
        for clause in e.clauses:
            bound = set(pattern_variables(clause.pattern))
            found |= (free_variables(clause.guard) | free_variables(clause.body)) - bound
        return frozenset(found)
    if isinstance(e, ELet):
        found = set().union(*(free_variables(x) for x in e.binds))
        return frozenset(found | (free_variables(e.body) - set(e.vars)))
    if isinstance(e, ELetrec):
        names = set(e.fnames)
        found = set(free_variables(e.body))
        for fun in e.funs:
            found |= free_variables(fun.body) - set(fun.params)
        return frozenset(found - names)
    if isinstance(e, EMap):
        return frozenset().union(*(free_variables(x) for x in e.keys + e.values))
    raise TypeError(f"Not an expression: {e!r}")
