from typing import Optional, Sequence, Tuple

from core_erlang_semantics.ast import (
    Clause,
    Expression,
    Pattern,
    PList,
    PLiteral,
    PTuple,
    PVar,
)
from core_erlang_semantics.values import Value, VList, VLiteral, VTuple

Bindings = Tuple[Tuple[str, Value], ...]


def match_pattern(v: Value, p: Pattern) -> Optional[Bindings]:
    """Bindings produced by matching ``v`` against the linear pattern ``p``, or None."""
    if isinstance(p, PVar):
        return ((p.name, v),)
    if isinstance(p, PLiteral):
        if isinstance(v, VLiteral) and v.literal == p.literal:
            return ()
        return None
    if isinstance(p, PList):
        if not isinstance(v, VList):
            return None
        head = match_pattern(v.head, p.head)
        if head is None:
            return None
        tail = match_pattern(v.tail, p.tail)
        if tail is None:
            return None
        return head + tail
    if isinstance(p, PTuple):
        if not isinstance(v, VTuple) or len(v.elements) != len(p.elements):
            return None
        bindings = ()
        for element, sub_pattern in zip(v.elements, p.elements):
            found = match_pattern(element, sub_pattern)
            if found is None:
                return None
            bindings += found
        return bindings
    raise TypeError(f"Not a pattern: {p!r}")


def match_clause(
        v: Value,
        cs: Sequence[Clause],
        i: int,
    ) -> Optional[Tuple[Expression, Expression, Bindings]]:
    if not 0 <= i < len(cs):
        return None
    clause = cs[i]
    bindings = match_pattern(v, clause.pattern)
    if bindings is None:
        return None
    return clause.guard, clause.body, bindings
