"""Semantic domain: the normal forms expressions evaluate to."""
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional, Tuple, Union

from core_erlang_semantics.ast import (
    Atom,
    EmptyList,
    EmptyMap,
    EmptyTuple,
    Expression,
    FunctionIdentifier,
    Integer,
    Literal,
)

if TYPE_CHECKING:
    from core_erlang_semantics.env import Environment


@dataclass(frozen=True)
class Concrete:
    env: "Environment"


@dataclass(frozen=True)
class Named:
    fid: FunctionIdentifier


ClosureRef = Union[Concrete, Named]


@dataclass(frozen=True)
class VLiteral:
    literal: Literal


@dataclass(frozen=True)
class VClosure:
    ref: ClosureRef
    params: Tuple[str, ...]
    body: Expression


@dataclass(frozen=True)
class VList:
    head: "Value"
    tail: "Value"


@dataclass(frozen=True)
class VTuple:
    elements: Tuple["Value", ...]


@dataclass(frozen=True)
class VMap:
    keys: Tuple["Value", ...]
    values: Tuple["Value", ...]

    def __post_init__(self):
        if len(self.keys) != len(self.values):
            raise ValueError(
                f"VMap needs as many values as keys ({len(self.keys)} != {len(self.values)})."
            )


Value = Union[VLiteral, VClosure, VList, VTuple, VMap]

tt = VLiteral(Atom("true"))
ff = VLiteral(Atom("false"))


def structurally_equal(a, b) -> bool:
    """Equality of values, environments or closure environments.

    Closures are equal when their refs, parameter lists and bodies are; a
    concrete ref compares its environment as an ordered association list.
    Walks an explicit stack, so arbitrarily deep values compare fine.
    """
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if x is y:
            continue
        if type(x) is not type(y):
            return False
        if isinstance(x, VLiteral):
            if x.literal != y.literal:
                return False
        elif isinstance(x, VList):
            stack.append((x.tail, y.tail))
            stack.append((x.head, y.head))
        elif isinstance(x, VTuple):
            if len(x.elements) != len(y.elements):
                return False
            stack.extend(zip(x.elements, y.elements))
        elif isinstance(x, VMap):
            if len(x.keys) != len(y.keys):
                return False
            stack.extend(zip(x.keys + x.values, y.keys + y.values))
        elif isinstance(x, VClosure):
            if x.params != y.params or x.body != y.body:
                return False
            stack.append((x.ref, y.ref))
        elif isinstance(x, Named):
            if x.fid != y.fid:
                return False
        elif isinstance(x, Concrete):
            stack.append((x.env, y.env))
        else:
            # Environment or ClosureEnv: ordered (key, value) pairs
            if len(x.bindings) != len(y.bindings):
                return False
            for (kx, vx), (ky, vy) in zip(x.bindings, y.bindings):
                if kx != ky:
                    return False
                stack.append((vx, vy))
    return True


def value_eq(a: Value, b: Value) -> bool:
    return structurally_equal(a, b)


def render_literal(lit: Literal) -> str:
    if isinstance(lit, Integer):
        return str(lit.value)
    if isinstance(lit, Atom):
        return quote_atom(lit.text)
    if isinstance(lit, EmptyList):
        return "[]"
    if isinstance(lit, EmptyTuple):
        return "{}"
    if isinstance(lit, EmptyMap):
        return "~{}~"
    raise TypeError(f"Not a literal: {lit!r}")


_ATOM_ESCAPES = {"\\": "\\\\", "'": "\\'", "\n": "\\n"}


def quote_atom(text: str) -> str:
    return "'" + "".join(_ATOM_ESCAPES.get(c, c) for c in text) + "'"


def render_value(v: Value, limit: Optional[int] = None) -> str:
    """Text form of ``v``; with ``limit``, longer text is cut and ends in ``...``."""
    out: List[str] = []
    size = 0
    stack: List[Union[str, Value]] = [v]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            piece = item
        elif isinstance(item, VLiteral):
            piece = render_literal(item.literal)
        elif isinstance(item, VList):
            stack.extend(("]", item.tail, "|", item.head))
            piece = "["
        elif isinstance(item, VTuple):
            stack.append("}")
            stack.extend(_separated(item.elements))
            piece = "{"
        elif isinstance(item, VMap):
            stack.append("}~")
            for i in reversed(range(len(item.keys))):
                stack.extend((item.values[i], "=>", item.keys[i]))
                if i:
                    stack.append(",")
            piece = "~{"
        elif isinstance(item, VClosure):
            tag = str(item.ref.fid) if isinstance(item.ref, Named) else "env"
            piece = f"#closure<{','.join(item.params)}>/{tag}"
        else:
            raise TypeError(f"Not a value: {item!r}")
        out.append(piece)
        size += len(piece)
        if limit is not None and size > limit:
            break
    text = "".join(out)
    if limit is not None and len(text) > limit:
        return text[:max(limit - 3, 0)] + "..."
    return text


def _separated(elements: Tuple[Value, ...]) -> List[Union[str, Value]]:
    """``elements`` with commas between them, reversed for pushing on a stack."""
    items: List[Union[str, Value]] = []
    for i, el in enumerate(elements):
        if i:
            items.append(",")
        items.append(el)
    return items[::-1]
