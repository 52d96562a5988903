"""Independent re-validation of derivation trees.

Every node is checked against the side conditions of the rule it claims to
apply, recomputing environments, lookups, pattern matches and builtin results
from scratch. Nothing from the evaluator is trusted beyond the node types.
"""
from dataclasses import dataclass, replace
import logging
from typing import List, Optional, Sequence, Tuple, Union

from core_erlang_semantics.ast import (
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
)
from core_erlang_semantics.env import (
    ArityMismatch,
    ClosureEnv,
    Environment,
    Var,
    add_bindings,
    append_funs_to_closure,
    append_funs_to_env,
    append_vars_to_env,
    get_env,
    get_value,
)
from core_erlang_semantics.eval import (
    RULE_FOR_EXPRESSION,
    DerivationNode,
    GuardFalse,
    NoMatch,
    PathLink,
    Rule,
    builtin_eval,
    path_of,
)
from core_erlang_semantics.logs import log_processing
from core_erlang_semantics.match import match_clause
from core_erlang_semantics.values import (
    Concrete,
    VClosure,
    VList,
    VLiteral,
    VMap,
    VTuple,
    ff,
    structurally_equal,
    tt,
    value_eq,
)

logger = logging.getLogger(__name__)

NodePath = Tuple[Union[int, str], ...]


@dataclass(frozen=True)
class Violation:
    path: NodePath
    rule: Optional[Rule]
    reason: str

    def __str__(self):
        where = "/".join(str(step) for step in self.path) or "root"
        rule = self.rule.name.lower() if self.rule is not None else "?"
        return f"{where} [{rule}]: {self.reason}"


@dataclass(frozen=True)
class CheckReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.violations


class _NodeCheck:
    """Side conditions of one node; premises are queued by the caller."""

    def __init__(self, node: DerivationNode, path: NodePath):
        self.node = node
        self.path = path
        self.reasons: List[str] = []
        self.extra: List[Tuple[DerivationNode, NodePath]] = []

    def fail(self, reason: str):
        self.reasons.append(reason)

    def expect_result(self, expected):
        if not value_eq(self.node.result, expected):
            self.fail("result does not follow from the premises")

    def expect_premise_count(self, count: int) -> bool:
        if len(self.node.premises) != count:
            self.fail(f"expected {count} premises, found {len(self.node.premises)}")
            return False
        return True

    def expect_config(
            self,
            premise: DerivationNode,
            env: Environment,
            clos: ClosureEnv,
            expr: Expression,
            label: str,
        ):
        if premise.expr != expr:
            self.fail(f"{label} premise evaluates the wrong expression")
        if not structurally_equal(premise.env, env):
            self.fail(f"{label} premise has the wrong variable environment")
        if not structurally_equal(premise.clos, clos):
            self.fail(f"{label} premise has the wrong closure environment")

    def expect_configs(self, premises: Sequence[DerivationNode], exprs: Sequence[Expression], label: str):
        for i, (premise, expr) in enumerate(zip(premises, exprs)):
            self.expect_config(premise, self.node.env, self.node.clos, expr, f"{label} {i}")


def _check_literal(chk: _NodeCheck, e: ELiteral):
    chk.expect_premise_count(0)
    chk.expect_result(VLiteral(e.literal))


def _check_lookup(chk: _NodeCheck, key):
    chk.expect_premise_count(0)
    bound = get_value(chk.node.env, key)
    if bound is None:
        chk.fail(f"{key} is not bound in the environment")
    else:
        chk.expect_result(bound)


def _check_var(chk: _NodeCheck, e: EVar):
    _check_lookup(chk, Var(e.name))


def _check_funsig(chk: _NodeCheck, e: EFunSig):
    _check_lookup(chk, e.fid)


def _check_fun(chk: _NodeCheck, e: EFun):
    chk.expect_premise_count(0)
    chk.expect_result(VClosure(Concrete(chk.node.env), e.params, e.body))


def _check_tuple(chk: _NodeCheck, e: ETuple):
    if chk.expect_premise_count(len(e.elements)):
        chk.expect_configs(chk.node.premises, e.elements, "element")
        chk.expect_result(VTuple(tuple(p.result for p in chk.node.premises)))


def _check_list(chk: _NodeCheck, e: EList):
    if chk.expect_premise_count(2):
        head, tail = chk.node.premises
        chk.expect_configs((head, tail), (e.head, e.tail), "list")
        chk.expect_result(VList(head.result, tail.result))


def _check_call(chk: _NodeCheck, e: ECall):
    if chk.expect_premise_count(len(e.args)):
        chk.expect_configs(chk.node.premises, e.args, "argument")
        chk.expect_result(builtin_eval(e.fname, [p.result for p in chk.node.premises]))


def _check_apply(chk: _NodeCheck, e: EApply):
    n = len(e.args)
    if not chk.expect_premise_count(n + 2):
        return
    node = chk.node
    args, target, body = node.premises[:n], node.premises[n], node.premises[n + 1]
    chk.expect_configs(args, e.args, "argument")
    chk.expect_config(target, node.env, node.clos, e.target, "target")
    closure = target.result
    if not isinstance(closure, VClosure):
        chk.fail("target does not evaluate to a closure")
        return
    try:
        body_env = append_vars_to_env(
            closure.params, [a.result for a in args], get_env(closure.ref, node.clos)
        )
    except ArityMismatch:
        chk.fail("closure arity differs from the number of arguments")
        return
    chk.expect_config(body, body_env, node.clos, closure.body, "body")
    chk.expect_result(body.result)


def _check_let(chk: _NodeCheck, e: ELet):
    if len(e.vars) != len(e.binds):
        chk.fail("let binds a different number of variables and expressions")
        return
    if not chk.expect_premise_count(len(e.binds) + 1):
        return
    node = chk.node
    binds, body = node.premises[:-1], node.premises[-1]
    chk.expect_configs(binds, e.binds, "bind")
    body_env = append_vars_to_env(e.vars, [b.result for b in binds], node.env)
    chk.expect_config(body, body_env, node.clos, e.body, "body")
    chk.expect_result(body.result)


def _check_letrec(chk: _NodeCheck, e: ELetrec):
    if len(e.fnames) != len(e.funs):
        chk.fail("letrec names a different number of functions and definitions")
        return
    if not chk.expect_premise_count(1):
        return
    node = chk.node
    body_env = append_funs_to_env(e.fnames, e.funs, node.env)
    body_clos = append_funs_to_closure(e.fnames, node.clos, body_env)
    body, = node.premises
    chk.expect_config(body, body_env, body_clos, e.body, "body")
    chk.expect_result(body.result)


def _check_map(chk: _NodeCheck, e: EMap):
    if len(e.keys) != len(e.values):
        chk.fail("map has a different number of keys and values")
        return
    if not chk.expect_premise_count(2 * len(e.keys)):
        return
    n = len(e.keys)
    keys, values = chk.node.premises[:n], chk.node.premises[n:]
    chk.expect_configs(keys, e.keys, "key")
    chk.expect_configs(values, e.values, "value")
    chk.expect_result(VMap(
        tuple(k.result for k in keys), tuple(v.result for v in values)
    ))


def _check_case(chk: _NodeCheck, e: ECase):
    node = chk.node
    evidence = node.case_evidence
    if evidence is None:
        chk.fail("case node carries no clause evidence")
        return
    if not chk.expect_premise_count(3):
        return
    scrutinee, guard, body = node.premises
    chk.expect_config(scrutinee, node.env, node.clos, e.scrutinee, "scrutinee")
    value = scrutinee.result

    chosen = match_clause(value, e.clauses, evidence.chosen)
    if chosen is None:
        chk.fail(f"clause {evidence.chosen} does not match the scrutinee")
        return
    guard_expr, body_expr, bindings = chosen
    extended = add_bindings(bindings, node.env)
    chk.expect_config(guard, extended, node.clos, guard_expr, "guard")
    if not value_eq(guard.result, tt):
        chk.fail(f"guard of clause {evidence.chosen} is not 'true'")
    chk.expect_config(body, extended, node.clos, body_expr, "body")
    chk.expect_result(body.result)

    if [step.clause for step in evidence.skipped] != list(range(evidence.chosen)):
        chk.fail("earlier clauses are not each accounted for exactly once")
        return
    for step in evidence.skipped:
        matched = match_clause(value, e.clauses, step.clause)
        if isinstance(step, NoMatch):
            if matched is not None:
                chk.fail(f"clause {step.clause} matches but was recorded as no match")
            continue
        if matched is None:
            chk.fail(f"clause {step.clause} does not match but its guard was evaluated")
            continue
        skipped_guard, _, skipped_bindings = matched
        chk.expect_config(
            step.guard, add_bindings(skipped_bindings, node.env), node.clos,
            skipped_guard, f"skipped guard {step.clause}",
        )
        if not value_eq(step.guard.result, ff):
            chk.fail(f"guard of skipped clause {step.clause} is not 'false'")
        chk.extra.append((step.guard, chk.path + (f"skip{step.clause}",)))


_CHECKS = {
    ELiteral: _check_literal,
    EVar: _check_var,
    EFunSig: _check_funsig,
    EFun: _check_fun,
    ETuple: _check_tuple,
    EList: _check_list,
    ECall: _check_call,
    EApply: _check_apply,
    ELet: _check_let,
    ELetrec: _check_letrec,
    EMap: _check_map,
    ECase: _check_case,
}


def check_node(node: DerivationNode, path: NodePath = ()) -> List[Violation]:
    """Violations of the node's own side conditions, premises excluded."""
    violations, _ = _check_node(node, path)
    return violations


def _check_node(node: DerivationNode, path: NodePath):
    expected = RULE_FOR_EXPRESSION.get(type(node.expr))
    if expected is None:
        return [Violation(path, node.rule, "not an expression")], []
    if node.rule != expected:
        return [Violation(
            path, node.rule,
            f"rule {node.rule.name.lower()} cannot conclude a "
            f"{expected.name.lower()} expression",
        )], []
    if node.case_evidence is not None and node.rule != Rule.CASE:
        return [Violation(path, node.rule, "clause evidence on a non-case node")], []
    chk = _NodeCheck(node, path)
    _CHECKS[type(node.expr)](chk, node.expr)
    return [Violation(path, node.rule, reason) for reason in chk.reasons], chk.extra


@log_processing
def validate(d: DerivationNode) -> CheckReport:
    violations: List[Violation] = []
    stack: List[Tuple[DerivationNode, PathLink]] = [(d, None)]
    while stack:
        node, link = stack.pop()
        found, extra = _check_node(node, ())
        if found:
            path = path_of(link)
            violations.extend(replace(v, path=path + v.path) for v in found)
        for guard, (step,) in extra:
            stack.append((guard, (link, step)))
        stack.extend((p, (link, i)) for i, p in enumerate(node.premises))
    violations.sort(key=lambda v: tuple(str(step) for step in v.path))
    if violations:
        logger.info(f"Derivation rejected with {len(violations)} violation(s).")
    else:
        logger.info("Derivation accepted.")
    return CheckReport(tuple(violations))
