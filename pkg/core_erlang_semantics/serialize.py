"""YAML interchange format for values, environments and derivation trees.

A derivation is written as four tables: ``values``, ``environments``,
``closure_environments`` and ``nodes``, plus the index of the ``root`` node.
Entries point at each other by index and only ever at entries before them,
so a result shared by many nodes is stored once and neither writing nor
reading a file recurses, however deep the tree or its values are.
Expressions are stored as formatted source text.
"""
import logging
from typing import Any, Callable, Dict, List, Sequence, Tuple

import yaml

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
from core_erlang_semantics.env import ClosureEnv, Environment, Var
from core_erlang_semantics.eval import (
    CaseEvidence,
    DerivationNode,
    GuardFalse,
    NoMatch,
    Rule,
)
from core_erlang_semantics.parser import ParseError, format_expr, parse_expr
from core_erlang_semantics.values import (
    Concrete,
    Named,
    Value,
    VClosure,
    VList,
    VLiteral,
    VMap,
    VTuple,
    render_value,
)

try:
    from yaml import CSafeDumper as _Dumper, CSafeLoader as _Loader
except ImportError:
    from yaml import SafeDumper as _Dumper, SafeLoader as _Loader

logger = logging.getLogger(__name__)

RENDERED_LIMIT = 72

_EMPTY_NAMES = {EmptyList: "list", EmptyTuple: "tuple", EmptyMap: "map"}
_EMPTY_LITERALS = {name: cls for cls, name in _EMPTY_NAMES.items()}


class DerivationFormatError(ValueError):
    pass


def encode_fid(fid: FunctionIdentifier) -> Dict[str, Any]:
    return {"name": fid.name, "arity": fid.arity}


def decode_fid(obj) -> FunctionIdentifier:
    return FunctionIdentifier(str(obj["name"]), int(obj["arity"]))


def encode_literal(lit: Literal) -> Dict[str, Any]:
    if isinstance(lit, Integer):
        return {"int": lit.value}
    if isinstance(lit, Atom):
        return {"atom": lit.text}
    return {"empty": _EMPTY_NAMES[type(lit)]}


def _value_parts(v: Value) -> Sequence[Value]:
    if isinstance(v, VList):
        return (v.head, v.tail)
    if isinstance(v, VTuple):
        return v.elements
    if isinstance(v, VMap):
        return v.keys + v.values
    if isinstance(v, VClosure) and isinstance(v.ref, Concrete):
        return tuple(value for _, value in v.ref.env)
    return ()


def _post_order(root, parts: Callable, known: Callable, emit: Callable) -> None:
    """Call ``emit`` on every unknown object under ``root``, parts first."""
    stack = [root]
    while stack:
        item = stack[-1]
        if known(item):
            stack.pop()
            continue
        pending = [part for part in parts(item) if not known(part)]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        emit(item)


class _Tables:
    """Index tables filled while encoding one document.

    Objects are identified by ``id``; ``_keep`` holds them so no id is reused
    while the tables are alive.
    """

    def __init__(self):
        self.values: List[Dict[str, Any]] = []
        self.environments: List[List[Dict[str, Any]]] = []
        self.closure_environments: List[List[Dict[str, Any]]] = []
        self.nodes: List[Dict[str, Any]] = []
        self._index: Dict[Tuple[str, int], int] = {}
        self._keep: List[Any] = []
        self._texts: Dict[int, str] = {}

    def _known(self, kind: str, obj) -> bool:
        return (kind, id(obj)) in self._index

    def _register(self, kind: str, obj, table: list, entry) -> int:
        self._index[(kind, id(obj))] = len(table)
        self._keep.append(obj)
        table.append(entry)
        return len(table) - 1

    def text(self, e: Expression) -> str:
        if id(e) not in self._texts:
            self._keep.append(e)
            self._texts[id(e)] = format_expr(e)
        return self._texts[id(e)]

    # values

    def value(self, v: Value) -> int:
        _post_order(
            v, _value_parts,
            lambda item: self._known("value", item),
            lambda item: self._register("value", item, self.values, self._value_entry(item)),
        )
        return self._index[("value", id(v))]

    def _value_entry(self, v: Value) -> Dict[str, Any]:
        ref = lambda part: self._index[("value", id(part))]
        if isinstance(v, VLiteral):
            return encode_literal(v.literal)
        if isinstance(v, VList):
            return {"list": [ref(v.head), ref(v.tail)]}
        if isinstance(v, VTuple):
            return {"tuple": [ref(el) for el in v.elements]}
        if isinstance(v, VMap):
            return {"map": {
                "keys": [ref(k) for k in v.keys],
                "values": [ref(x) for x in v.values],
            }}
        if isinstance(v, VClosure):
            if isinstance(v.ref, Concrete):
                closure_ref = {"env": self._bindings(v.ref.env)}
            else:
                closure_ref = {"fun": encode_fid(v.ref.fid)}
            return {"closure": {
                "ref": closure_ref,
                "params": list(v.params),
                "body": self.text(v.body),
            }}
        raise TypeError(f"Not a value: {v!r}")

    # environments

    def _bindings(self, env: Environment) -> List[Dict[str, Any]]:
        encoded = []
        for key, value in env:
            if isinstance(key, Var):
                encoded.append({"var": key.name, "value": self.value(value)})
            else:
                encoded.append({"fun": encode_fid(key), "value": self.value(value)})
        return encoded

    def environment(self, env: Environment) -> int:
        if not self._known("env", env):
            self._register("env", env, self.environments, self._bindings(env))
        return self._index[("env", id(env))]

    def closure_environment(self, clos: ClosureEnv) -> int:
        if not self._known("clos", clos):
            entry = [
                {"fun": encode_fid(fid), "env": self.environment(env)}
                for fid, env in clos
            ]
            self._register("clos", clos, self.closure_environments, entry)
        return self._index[("clos", id(clos))]

    # nodes

    def node(self, root: DerivationNode) -> int:
        _post_order(
            root, DerivationNode.children,
            lambda item: self._known("node", item),
            lambda item: self._register("node", item, self.nodes, self._node_entry(item)),
        )
        return self._index[("node", id(root))]

    def _node_entry(self, node: DerivationNode) -> Dict[str, Any]:
        ref = lambda part: self._index[("node", id(part))]
        entry = {
            "rule": int(node.rule),
            "name": node.rule.name.lower(),
            "expr": self.text(node.expr),
            "rendered": render_value(node.result, RENDERED_LIMIT),
            "result": self.value(node.result),
            "env": self.environment(node.env),
            "clos": self.closure_environment(node.clos),
            "premises": [ref(p) for p in node.premises],
        }
        if node.case_evidence is not None:
            skipped = []
            for step in node.case_evidence.skipped:
                if isinstance(step, NoMatch):
                    skipped.append({"clause": step.clause, "outcome": "nomatch"})
                else:
                    skipped.append({
                        "clause": step.clause,
                        "outcome": "guard_false",
                        "guard": ref(step.guard),
                    })
            entry["case_evidence"] = {
                "chosen": node.case_evidence.chosen,
                "skipped": skipped,
            }
        return entry


class _Reader:
    """Rebuilds objects table by table; an entry may only refer backwards."""

    def __init__(self):
        self.values: List[Value] = []
        self.environments: List[Environment] = []
        self.closure_environments: List[ClosureEnv] = []
        self.nodes: List[DerivationNode] = []
        self._exprs: Dict[str, Expression] = {}

    @staticmethod
    def _at(table: list, index, what: str):
        if type(index) is not int or not 0 <= index < len(table):
            raise DerivationFormatError(f"{what} reference {index!r} points at no earlier entry")
        return table[index]

    def expr(self, text) -> Expression:
        text = str(text)
        if text not in self._exprs:
            self._exprs[text] = parse_expr(text)
        return self._exprs[text]

    def value(self, obj) -> Value:
        if not isinstance(obj, dict) or len(obj) != 1:
            raise DerivationFormatError(f"Malformed value: {obj!r}")
        (tag, payload), = obj.items()
        ref = lambda index: self._at(self.values, index, "value")
        if tag == "int":
            if type(payload) is not int:
                raise DerivationFormatError(f"Not an integer: {payload!r}")
            return VLiteral(Integer(payload))
        if tag == "atom":
            return VLiteral(Atom(str(payload)))
        if tag == "empty":
            return VLiteral(_EMPTY_LITERALS[payload]())
        if tag == "list":
            head, tail = payload
            return VList(ref(head), ref(tail))
        if tag == "tuple":
            return VTuple(tuple(ref(el) for el in payload))
        if tag == "map":
            return VMap(
                tuple(ref(k) for k in payload["keys"]),
                tuple(ref(x) for x in payload["values"]),
            )
        if tag == "closure":
            ref_obj = payload["ref"]
            if "env" in ref_obj:
                closure_ref = Concrete(self.bindings(ref_obj["env"]))
            else:
                closure_ref = Named(decode_fid(ref_obj["fun"]))
            return VClosure(
                closure_ref,
                tuple(str(p) for p in payload["params"]),
                self.expr(payload["body"]),
            )
        raise DerivationFormatError(f"Unknown value tag {tag!r}")

    def bindings(self, obj) -> Environment:
        pairs = []
        for item in obj or []:
            key = Var(str(item["var"])) if "var" in item else decode_fid(item["fun"])
            pairs.append((key, self._at(self.values, item["value"], "value")))
        return Environment(tuple(pairs))

    def closure_environment(self, obj) -> ClosureEnv:
        return ClosureEnv(tuple(
            (decode_fid(item["fun"]), self._at(self.environments, item["env"], "environment"))
            for item in obj or []
        ))

    def _evidence(self, obj) -> CaseEvidence:
        skipped = []
        for step in obj["skipped"] or []:
            if step["outcome"] == "nomatch":
                skipped.append(NoMatch(int(step["clause"])))
            elif step["outcome"] == "guard_false":
                guard = self._at(self.nodes, step["guard"], "node")
                skipped.append(GuardFalse(int(step["clause"]), guard))
            else:
                raise DerivationFormatError(f"Unknown case outcome {step['outcome']!r}")
        return CaseEvidence(int(obj["chosen"]), tuple(skipped))

    def node(self, obj) -> DerivationNode:
        evidence = obj.get("case_evidence")
        return DerivationNode(
            rule=Rule(int(obj["rule"])),
            env=self._at(self.environments, obj["env"], "environment"),
            clos=self._at(self.closure_environments, obj["clos"], "closure environment"),
            expr=self.expr(obj["expr"]),
            result=self._at(self.values, obj["result"], "value"),
            premises=tuple(self._at(self.nodes, p, "node") for p in obj["premises"] or []),
            case_evidence=None if evidence is None else self._evidence(evidence),
        )

    def read(self, doc) -> DerivationNode:
        for entry in doc.get("values") or []:
            self.values.append(self.value(entry))
        for entry in doc.get("environments") or []:
            self.environments.append(self.bindings(entry))
        for entry in doc.get("closure_environments") or []:
            self.closure_environments.append(self.closure_environment(entry))
        for entry in doc["nodes"]:
            self.nodes.append(self.node(entry))
        return self._at(self.nodes, doc["root"], "root")


def _decoding(func: Callable):
    try:
        return func()
    except DerivationFormatError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError, ParseError) as exc:
        raise DerivationFormatError(f"Malformed derivation: {exc}") from exc


def encode_value(v: Value) -> List[Dict[str, Any]]:
    """Value table holding ``v`` as its last entry."""
    tables = _Tables()
    tables.value(v)
    return tables.values


def decode_value(entries) -> Value:
    def read():
        reader = _Reader()
        for entry in entries:
            reader.values.append(reader.value(entry))
        if not reader.values:
            raise DerivationFormatError("An empty value table holds no value.")
        return reader.values[-1]
    return _decoding(read)


def encode_derivation(node: DerivationNode) -> Dict[str, Any]:
    tables = _Tables()
    root = tables.node(node)
    return {
        "root": root,
        "values": tables.values,
        "environments": tables.environments,
        "closure_environments": tables.closure_environments,
        "nodes": tables.nodes,
    }


def decode_derivation(doc) -> DerivationNode:
    if not isinstance(doc, dict):
        raise DerivationFormatError("A derivation must be a mapping.")
    return _decoding(lambda: _Reader().read(doc))


def dump_derivation(node: DerivationNode) -> str:
    return yaml.dump(
        encode_derivation(node),
        Dumper=_Dumper,
        sort_keys=False,
        allow_unicode=True,
        default_flow_style=None,
    )


def load_derivation(text: str) -> DerivationNode:
    try:
        doc = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        raise DerivationFormatError(f"Not a YAML document: {exc}") from exc
    node = decode_derivation(doc)
    logger.info(f"Loaded derivation with rule {node.rule.name.lower()} at the root.")
    return node
