"""Concrete syntax: a lark grammar for the Core Erlang subset and its printer.

``format_expr`` emits text that ``parse_expr`` maps back to an equal tree, with
two deliberate exceptions: an empty ``ETuple``/``EMap`` prints as the ``{}`` /
``~{}~`` literal, and a module-qualified call keeps only its function name.
"""
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
import logging
from typing import FrozenSet, Iterator, Optional

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import (
    UnexpectedCharacters,
    UnexpectedEOF,
    UnexpectedInput,
    UnexpectedToken,
    VisitError,
)

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
    FunctionIdentifier,
    FunDef,
    Integer,
    Literal,
    Pattern,
    PList,
    PLiteral,
    PTuple,
    PVar,
)
from core_erlang_semantics.logs import log_processing
from core_erlang_semantics.values import quote_atom, render_literal

logger = logging.getLogger(__name__)

GRAMMAR = r"""
?start: expr

?expr: literal_expr
     | var
     | funsig_expr
     | fun
     | list
     | tuple
     | map
     | call
     | apply
     | case
     | let
     | letrec
     | "(" expr ")"

literal_expr: literal
var: VAR
funsig_expr: funsig

literal: INT -> integer
       | ATOM -> atom
       | "[" "]" -> empty_list
       | "{" "}" -> empty_tuple
       | "~{" "}~" -> empty_map

funsig: ATOM "/" INT
fun: "fun" "(" [names] ")" "->" expr
names: VAR ("," VAR)*
exprs: expr ("," expr)*

list: "[" exprs ["|" expr] "]"
tuple: "{" exprs "}"
map: "~{" pair ("," pair)* "}~"
pair: expr "=>" expr

call: "call" ATOM [":" ATOM] "(" [exprs] ")"
apply: "apply" apply_target "(" [exprs] ")"
?apply_target: var
             | funsig_expr
             | "(" expr ")"

case: "case" expr "of" clause+ "end"
clause: pattern ["when" expr] "->" expr

let: "let" let_vars "=" let_binds "in" expr
let_vars: VAR -> single_var
        | "<" [names] ">" -> var_group
let_binds: expr -> single_bind
         | "<" [exprs] ">" -> bind_group

letrec: "letrec" fundefs "in" expr
fundefs: (fundef ("," fundef)*)?
fundef: funsig "=" fun

pattern: VAR -> pvar
       | literal -> pliteral
       | "[" patterns ["|" pattern] "]" -> plist
       | "{" patterns "}" -> ptuple
patterns: pattern ("," pattern)*

VAR: /[A-Z_][A-Za-z0-9_@]*/
ATOM: /'(?:[^'\\\n]|\\.)*'/
INT: /-?[0-9]+/
COMMENT: /%[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
"""

TRUE_GUARD = ELiteral(Atom("true"))
RESERVED_ATOM_PREFIX = "@"


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, column: int = 0,
                 expected: FrozenSet[str] = frozenset()):
        super().__init__(message)
        self.line = line
        self.column = column
        self.expected = expected

    def __str__(self):
        text = f"{self.line}:{self.column}: {self.args[0]}"
        if self.expected:
            text += f" (expected one of: {', '.join(sorted(self.expected))})"
        return text


def _unescape_atom(token: Token) -> str:
    body = token[1:-1]
    chars = []
    escaped = False
    for c in body:
        if escaped:
            chars.append("\n" if c == "n" else c)
            escaped = False
        elif c == "\\":
            escaped = True
        else:
            chars.append(c)
    text = "".join(chars)
    if not text:
        raise ParseError("empty atom", token.line, token.column)
    if text.startswith(RESERVED_ATOM_PREFIX):
        raise ParseError(
            f"atoms starting with {RESERVED_ATOM_PREFIX!r} are reserved",
            token.line, token.column,
        )
    return text


def _function_identifier(name: Token, arity: Token) -> FunctionIdentifier:
    if int(arity) < 0:
        raise ParseError("negative arity", arity.line, arity.column)
    return FunctionIdentifier(_unescape_atom(name), int(arity))


def _list_of(items: Optional[list]) -> tuple:
    return () if items is None else tuple(items)


@v_args(inline=True)
class _ToAst(Transformer):
    # literals
    def integer(self, token):
        return Integer(int(token))

    def atom(self, token):
        return Atom(_unescape_atom(token))

    def empty_list(self):
        return EmptyList()

    def empty_tuple(self):
        return EmptyTuple()

    def empty_map(self):
        return EmptyMap()

    # expressions
    def literal_expr(self, literal):
        return ELiteral(literal)

    def var(self, token):
        return EVar(str(token))

    def funsig(self, name, arity):
        return _function_identifier(name, arity)

    def funsig_expr(self, fid):
        return EFunSig(fid)

    def names(self, *tokens):
        return tuple(str(t) for t in tokens)

    def exprs(self, *items):
        return list(items)

    def fun(self, names, body):
        return EFun(_list_of(names), body)

    def list(self, items, tail):
        tail = ELiteral(EmptyList()) if tail is None else tail
        for item in reversed(items):
            tail = EList(item, tail)
        return tail

    def tuple(self, items):
        return ETuple(tuple(items))

    def pair(self, key, value):
        return key, value

    def map(self, *pairs):
        return EMap(tuple(k for k, _ in pairs), tuple(v for _, v in pairs))

    def call(self, first, second, args):
        fname = first if second is None else second
        return ECall(_unescape_atom(fname), _list_of(args))

    def apply(self, target, args):
        return EApply(target, _list_of(args))

    def clause(self, pattern, guard, body):
        return Clause(pattern, TRUE_GUARD if guard is None else guard, body)

    def case(self, scrutinee, *clauses):
        return ECase(scrutinee, tuple(clauses))

    def single_var(self, token):
        return (str(token),)

    def var_group(self, names):
        return _list_of(names)

    def single_bind(self, expr):
        return (expr,)

    def bind_group(self, items):
        return _list_of(items)

    def let(self, names, binds, body):
        return ELet(names, binds, body)

    def fundef(self, fid, fun):
        return fid, FunDef(fun.params, fun.body)

    def fundefs(self, *defs):
        return defs

    def letrec(self, defs, body):
        return ELetrec(
            tuple(fid for fid, _ in defs), tuple(fun for _, fun in defs), body
        )

    # patterns
    def pvar(self, token):
        return PVar(str(token))

    def pliteral(self, literal):
        return PLiteral(literal)

    def patterns(self, *items):
        return list(items)

    def plist(self, items, tail):
        tail = PLiteral(EmptyList()) if tail is None else tail
        for item in reversed(items):
            tail = PList(item, tail)
        return tail

    def ptuple(self, items):
        return PTuple(tuple(items))


@lru_cache(maxsize=None)
def get_parser() -> Lark:
    return Lark(GRAMMAR, parser="lalr", maybe_placeholders=True)


def _parse_error(exc: UnexpectedInput) -> ParseError:
    if isinstance(exc, UnexpectedEOF):
        return ParseError("unexpected end of input", exc.line, exc.column,
                          frozenset(exc.expected))
    if isinstance(exc, UnexpectedToken):
        return ParseError(f"unexpected token {str(exc.token)!r}", exc.line,
                          exc.column, frozenset(exc.expected))
    if isinstance(exc, UnexpectedCharacters):
        return ParseError(f"unexpected character {exc.char!r}", exc.line,
                          exc.column, frozenset(exc.allowed or ()))
    return ParseError(str(exc), getattr(exc, "line", 0), getattr(exc, "column", 0))


def _transform(tree):
    try:
        return _ToAst().transform(tree)
    except VisitError as exc:
        if isinstance(exc.orig_exc, ParseError):
            raise exc.orig_exc from exc
        raise ParseError(str(exc.orig_exc)) from exc


@log_processing
def parse_expr(src: str) -> Expression:
    try:
        tree = get_parser().parse(src)
    except UnexpectedInput as exc:
        raise _parse_error(exc) from exc
    return _transform(tree)


def parse_literal(src: str) -> Literal:
    """Parse a lone literal such as ``5``, ``'ok'`` or ``[]``."""
    expr = parse_expr(src)
    if not isinstance(expr, ELiteral):
        raise ParseError(f"not a literal: {src.strip()!r}", 1, 1)
    return expr.literal


@dataclass(frozen=True)
class SourceProgram:
    text: str
    origin: str = "<string>"

    @classmethod
    def from_file(cls, path: Path) -> "SourceProgram":
        with open(path, "r", encoding="utf-8") as rf:
            return cls(rf.read(), str(path))

    def tokens(self) -> Iterator[Token]:
        """Tokens with ``line``/``column`` positions; comments and whitespace dropped."""
        try:
            yield from get_parser().lex(self.text, dont_ignore=False)
        except UnexpectedInput as exc:
            raise _parse_error(exc) from exc

    def parse(self) -> Expression:
        return parse_expr(self.text)


def parse_file(path: Path) -> Expression:
    return SourceProgram.from_file(path).parse()


# Printing

def format_pattern(p: Pattern) -> str:
    if isinstance(p, PVar):
        return p.name
    if isinstance(p, PLiteral):
        return render_literal(p.literal)
    if isinstance(p, PList):
        return f"[{format_pattern(p.head)}|{format_pattern(p.tail)}]"
    if isinstance(p, PTuple):
        return "{" + ",".join(format_pattern(el) for el in p.elements) + "}"
    raise TypeError(f"Not a pattern: {p!r}")


def _format_all(items) -> str:
    return ", ".join(format_expr(x) for x in items)


def _format_apply_target(e: Expression) -> str:
    if isinstance(e, (EVar, EFunSig)):
        return format_expr(e)
    return f"({format_expr(e)})"


def _format_fun(params, body) -> str:
    return f"fun({', '.join(params)}) -> {format_expr(body)}"


def format_expr(e: Expression) -> str:
    if isinstance(e, ELiteral):
        return render_literal(e.literal)
    if isinstance(e, EVar):
        return e.name
    if isinstance(e, EFunSig):
        return f"{quote_atom(e.fid.name)}/{e.fid.arity}"
    if isinstance(e, EFun):
        return _format_fun(e.params, e.body)
    if isinstance(e, EList):
        return f"[{format_expr(e.head)}|{format_expr(e.tail)}]"
    if isinstance(e, ETuple):
        return "{" + _format_all(e.elements) + "}"
    if isinstance(e, EMap):
        if not e.keys:
            return "~{}~"
        pairs = ", ".join(
            f"{format_expr(k)} => {format_expr(v)}" for k, v in zip(e.keys, e.values)
        )
        return "~{" + pairs + "}~"
    if isinstance(e, ECall):
        return f"call {quote_atom(e.fname)}({_format_all(e.args)})"
    if isinstance(e, EApply):
        return f"apply {_format_apply_target(e.target)}({_format_all(e.args)})"
    if isinstance(e, ECase):
        clauses = " ".join(
            f"{format_pattern(c.pattern)} when {format_expr(c.guard)} -> {format_expr(c.body)}"
            for c in e.clauses
        )
        return f"case {format_expr(e.scrutinee)} of {clauses} end"
    if isinstance(e, ELet):
        if len(e.vars) == 1 and len(e.binds) == 1:
            return f"let {e.vars[0]} = {format_expr(e.binds[0])} in {format_expr(e.body)}"
        return (
            f"let <{', '.join(e.vars)}> = <{_format_all(e.binds)}> "
            f"in {format_expr(e.body)}"
        )
    if isinstance(e, ELetrec):
        defs = ", ".join(
            f"{format_expr(EFunSig(fid))} = {_format_fun(fun.params, fun.body)}"
            for fid, fun in zip(e.fnames, e.funs)
        )
        return f"letrec {defs} in {format_expr(e.body)}" if defs else f"letrec in {format_expr(e.body)}"
    raise TypeError(f"Not an expression: {e!r}")
