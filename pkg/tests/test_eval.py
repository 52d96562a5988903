from concurrent.futures import ThreadPoolExecutor
import sys

import pytest

from core_erlang_semantics.ast import (
    Atom,
    EApply,
    EFun,
    EFunSig,
    ELet,
    ELiteral,
    EMap,
    EmptyList,
    EVar,
    FunctionIdentifier,
    Integer,
)
from core_erlang_semantics.checker import validate
from core_erlang_semantics.env import (
    EMPTY_CLOS,
    EMPTY_ENV,
    Var,
    get_value,
    insert_value,
)
from core_erlang_semantics.eval import (
    RULE_FOR_EXPRESSION,
    BadArity,
    CaseEvidence,
    EvalConfig,
    Failure,
    GuardFalse,
    LengthMismatch,
    NoMatch,
    NoMatchingClause,
    NonBooleanGuard,
    NotAClosure,
    OutOfFuel,
    Rule,
    Success,
    UnboundIdentifier,
    eval_expr,
    evaluate,
    render_derivation,
)
from core_erlang_semantics.generators import generate_expressions
from core_erlang_semantics.parser import parse_expr
from core_erlang_semantics.values import (
    Named,
    VClosure,
    VList,
    VLiteral,
    VMap,
    VTuple,
    render_value,
    value_eq,
)

from tests.conftest import corpus_program


def lit(n):
    return VLiteral(Integer(n))


def run(src, env=EMPTY_ENV, fuel=None):
    return evaluate(parse_expr(src), env, EMPTY_CLOS, fuel)


def value_of(src, env=EMPTY_ENV, fuel=None):
    outcome = run(src, env, fuel)
    assert isinstance(outcome, Success), outcome
    return outcome.value


def error_of(src, env=EMPTY_ENV, fuel=None):
    outcome = run(src, env, fuel)
    assert isinstance(outcome, Failure), outcome
    return outcome.error


# Worked examples

def test_let_binding():
    outcome = evaluate(corpus_program("let_binding"))
    assert outcome.value == lit(5)
    d = outcome.derivation
    assert d.rule == Rule.LET
    assert [p.rule for p in d.premises] == [Rule.LITERAL, Rule.VAR]
    assert get_value(d.premises[1].env, Var("X")) == lit(5)


def test_closure_keeps_its_defining_environment():
    assert evaluate(corpus_program("closure_capture")).value == lit(42)


def test_static_binding():
    assert evaluate(corpus_program("static_binding")).value == lit(5)


def test_divergent_letrec_runs_out_of_fuel():
    outcome = evaluate(corpus_program("letrec_divergent"), fuel=1000)
    assert isinstance(outcome, Failure)
    assert isinstance(outcome.error, OutOfFuel)
    assert outcome.error.name == "OutOfFuel"


def test_recursive_function_value_refers_to_itself_by_name():
    value = evaluate(corpus_program("recursion_listing")).value
    f1 = FunctionIdentifier("f1", 0)
    assert isinstance(value, VClosure)
    assert value.ref == Named(f1)
    assert value.params == ()


def test_inner_letrec_overwrites_the_closure_environment():
    src = (
        "let X = 1 in letrec 'f'/0 = fun() -> X in let G = 'f'/0 in "
        "let X = 2 in letrec 'f'/0 = fun() -> 3 in apply G()"
    )
    assert value_of(src) == lit(2)


def test_recursion_over_a_list():
    assert evaluate(corpus_program("sum_list")).value == lit(6)


def test_mutual_recursion():
    assert evaluate(corpus_program("even_odd")).value == VLiteral(Atom("true"))


def test_map_and_list_values():
    value = evaluate(corpus_program("map")).value
    assert isinstance(value, VMap)
    assert value.values[1] == VTuple((lit(2), lit(3)))
    value = value_of("[1, 2]")
    assert value == VList(lit(1), VList(lit(2), VLiteral(EmptyList())))


def test_environment_is_given_by_the_caller():
    env = insert_value(EMPTY_ENV, Var("Z"), lit(10))
    assert value_of("call 'plus'(Z, 4)", env) == lit(14)


# Case

def test_case_records_skipped_clauses():
    outcome = evaluate(corpus_program("case_guard"))
    assert outcome.value == lit(2)
    evidence = outcome.derivation.case_evidence
    assert evidence.chosen == 1
    assert len(evidence.skipped) == 1
    skipped, = evidence.skipped
    assert isinstance(skipped, GuardFalse)
    assert skipped.clause == 0
    assert skipped.guard.result == VLiteral(Atom("false"))


def test_case_no_match_evidence():
    outcome = run("case 3 of 1 -> 'a' 2 -> 'b' N -> N end")
    assert outcome.value == lit(3)
    assert outcome.derivation.case_evidence == CaseEvidence(2, (NoMatch(0), NoMatch(1)))


def test_case_binds_pattern_variables_in_the_body():
    assert value_of("case {1, [2]} of {A, [B|_T]} -> call 'plus'(A, B) end") == lit(3)


def test_case_without_matching_clause():
    error = error_of("case 1 of 2 -> 3 end")
    assert isinstance(error, NoMatchingClause)
    assert error.value == lit(1)


def test_guard_must_be_boolean():
    error = error_of("case 1 of X when 5 -> X end")
    assert isinstance(error, NonBooleanGuard)
    assert error.path == ("guard0",)


# Errors

def test_unbound_variable():
    error = error_of("{1, X}")
    assert isinstance(error, UnboundIdentifier)
    assert error.key == Var("X")
    assert error.path == (1,)


def test_unbound_function_identifier():
    error = evaluate(EFunSig(FunctionIdentifier("f", 2))).error
    assert isinstance(error, UnboundIdentifier)


def test_applying_a_non_closure():
    error = error_of("let X = 5 in apply X()")
    assert isinstance(error, NotAClosure)
    assert error.path == ("body", "target")


def test_wrong_number_of_arguments():
    error = error_of("apply (fun(A) -> A)()")
    assert isinstance(error, BadArity)
    assert (error.expected, error.got) == (1, 0)


def test_let_length_mismatch():
    error = evaluate(ELet(("X", "Y"), (ELiteral(Integer(1)),), EVar("X"))).error
    assert isinstance(error, LengthMismatch)
    assert error.site == "let"


def test_map_length_mismatch():
    error = evaluate(EMap((ELiteral(Integer(1)),), ())).error
    assert isinstance(error, LengthMismatch)
    assert error.site == "map"


def test_unknown_builtin_and_bad_arithmetic():
    assert value_of("call 'minus'(1, 2)") == VLiteral(Atom("@undef"))
    assert value_of("call 'plus'(1, 'a')") == VLiteral(Atom("@badarith"))


# Fuel

def test_fuel_must_be_non_negative():
    with pytest.raises(ValueError):
        EvalConfig(EMPTY_ENV, EMPTY_CLOS, ELiteral(Integer(1)), -1)


def test_zero_fuel_always_fails():
    assert isinstance(run("1", fuel=0).error, OutOfFuel)


def test_fuel_equals_derivation_height():
    expr = corpus_program("let_binding")
    assert isinstance(evaluate(expr, fuel=1).error, OutOfFuel)
    outcome = evaluate(expr, fuel=2)
    assert outcome.value == lit(5)
    assert outcome.derivation.height() == 2


def test_more_fuel_never_changes_a_result():
    for i, expr in enumerate(generate_expressions(seed=3, n=100)):
        first = evaluate(expr, fuel=10000)
        if not isinstance(first, Success):
            continue
        height = first.derivation.height()
        for fuel in (height, height + 1, 2 * height + 5):
            again = evaluate(expr, fuel=fuel)
            assert isinstance(again, Success), (i, fuel)
            assert value_eq(again.value, first.value)
        assert isinstance(evaluate(expr, fuel=height - 1).error, OutOfFuel)


# Properties over a generated corpus

@pytest.fixture(scope="module")
def generated_programs():
    return generate_expressions(seed=2024, n=500)


def test_determinism_at_fuel_and_double_fuel(generated_programs):
    succeeded = 0
    for expr in generated_programs:
        once = evaluate(expr, fuel=500)
        twice = evaluate(expr, fuel=1000)
        if isinstance(once, Success):
            succeeded += 1
            assert isinstance(twice, Success)
            assert value_eq(once.value, twice.value)
            assert once.derivation == twice.derivation
    assert succeeded > 0


def test_every_derivation_validates(generated_programs):
    for expr in generated_programs:
        outcome = evaluate(expr)
        if isinstance(outcome, Success):
            report = validate(outcome.derivation)
            assert report.valid, report.violations
            assert value_eq(outcome.derivation.result, outcome.value)


def test_rule_matches_expression_constructor(generated_programs):
    for expr in generated_programs:
        outcome = evaluate(expr)
        if not isinstance(outcome, Success):
            continue
        stack = [outcome.derivation]
        while stack:
            node = stack.pop()
            assert node.rule == RULE_FOR_EXPRESSION[type(node.expr)]
            stack.extend(node.premises)


def test_eval_expr_is_repeatable():
    cfg = EvalConfig(EMPTY_ENV, EMPTY_CLOS, corpus_program("sum_list"), 100)
    assert eval_expr(cfg) == eval_expr(cfg)


def test_render_derivation_lists_every_judgement():
    text = render_derivation(evaluate(corpus_program("let_binding")).derivation)
    lines = text.splitlines()
    assert len(lines) == 3
    assert lines[0].startswith("⟨{}, {}, let X = 5 in X⟩ → 5")
    assert lines[0].endswith("[let]")
    assert lines[2].strip().startswith("⟨{X : 5}, {}, X⟩ → 5")


# Deep results

BUILD = """
letrec 'build'/1 = fun(N) ->
    case N of
      0 -> []
      M -> [M | apply 'build'/1(call 'plus'(M, -1))]
    end
in apply 'build'/1(%d)
"""


def countdown(n):
    value = VLiteral(EmptyList())
    for k in range(1, n + 1):
        value = VList(lit(k), value)
    return value


def test_deep_list_result():
    outcome = run(BUILD % 2000)
    assert isinstance(outcome, Success), outcome
    assert value_eq(outcome.value, countdown(2000))
    assert not value_eq(outcome.value, countdown(1999))
    assert render_value(outcome.value) == render_value(countdown(2000))
    assert outcome.derivation.height() > 2000
    assert validate(outcome.derivation).valid


def test_deep_evaluations_in_threads_restore_the_recursion_limit():
    before = sys.getrecursionlimit()
    with ThreadPoolExecutor(max_workers=2) as pool:
        outcomes = list(pool.map(run, [BUILD % 1500, BUILD % 2000]))
    assert all(isinstance(outcome, Success) for outcome in outcomes)
    assert value_eq(outcomes[0].value, countdown(1500))
    assert value_eq(outcomes[1].value, countdown(2000))
    assert sys.getrecursionlimit() == before


# Closures capture their definition environment

def test_rebinding_after_capture_keeps_the_captured_value(generated_programs):
    terminating = [
        (expr, outcome) for expr, outcome in
        ((expr, evaluate(expr)) for expr in generated_programs[:200])
        if isinstance(outcome, Success)
    ]
    assert len(terminating) >= 2
    for (first, captured), (second, _) in zip(terminating, terminating[1:]):
        program = ELet(("X",), (first,), ELet(
            ("F",), (EFun((), EVar("X")),),
            ELet(("X",), (second,), EApply(EVar("F"), ())),
        ))
        outcome = evaluate(program)
        assert isinstance(outcome, Success), outcome
        assert value_eq(outcome.value, captured.value)
