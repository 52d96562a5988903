import pytest

from core_erlang_semantics.ast import (
    ARITY_MISMATCH,
    DUPLICATE_PARAMETER,
    LENGTH_MISMATCH,
    NONLINEAR_PATTERN,
    Atom,
    Clause,
    EApply,
    ECase,
    EFun,
    EFunSig,
    ELet,
    ELetrec,
    ELiteral,
    EMap,
    ETuple,
    EVar,
    FunDef,
    FunctionIdentifier,
    Integer,
    PTuple,
    PVar,
    free_variables,
    is_linear,
    well_formed,
)
from core_erlang_semantics.generators import generate_expressions

TRUE = ELiteral(Atom("true"))
F0 = FunctionIdentifier("f", 0)


def test_atom_must_not_be_empty():
    with pytest.raises(ValueError):
        Atom("")


def test_function_identifier_rejects_negative_arity():
    with pytest.raises(ValueError):
        FunctionIdentifier("f", -1)


def test_function_identifier_text():
    assert str(FunctionIdentifier("sum", 1)) == "'sum'/1"


def test_well_formed_accepts_generated_programs():
    for e in generate_expressions(seed=11, n=200):
        assert well_formed(e) == []


def test_let_length_mismatch_is_reported_at_its_path():
    inner = ELet(("X", "Y"), (ELiteral(Integer(1)),), EVar("X"))
    e = ETuple((ELiteral(Integer(0)), inner))
    diagnostics = well_formed(e)
    assert [(d.path, d.reason) for d in diagnostics] == [((1,), LENGTH_MISMATCH)]


def test_map_length_mismatch():
    e = EMap((ELiteral(Integer(1)),), ())
    assert [d.reason for d in well_formed(e)] == [LENGTH_MISMATCH]


def test_letrec_arity_must_match_parameters():
    e = ELetrec((F0,), (FunDef(("X",), EVar("X")),), EFunSig(F0))
    diagnostics = well_formed(e)
    assert [(d.path, d.reason) for d in diagnostics] == [(("fun0",), ARITY_MISMATCH)]


def test_duplicate_parameters():
    e = EFun(("X", "X"), EVar("X"))
    assert [d.reason for d in well_formed(e)] == [DUPLICATE_PARAMETER]


def test_nonlinear_pattern():
    pattern = PTuple((PVar("A"), PVar("A")))
    assert not is_linear(pattern)
    e = ECase(ELiteral(Integer(1)), (Clause(pattern, TRUE, EVar("A")),))
    diagnostics = well_formed(e)
    assert [(d.path, d.reason) for d in diagnostics] == [(("clause0",), NONLINEAR_PATTERN)]


def test_deep_nesting_does_not_recurse():
    e = ELiteral(Integer(0))
    for _ in range(20000):
        e = ETuple((e,))
    assert well_formed(e) == []


def test_free_variables_of_let_and_fun():
    e = ELet(("X",), (EVar("Y"),), EFun(("Z",), ETuple((EVar("X"), EVar("Z"), EVar("W")))))
    assert free_variables(e) == {"Y", "W"}


def test_letrec_binds_its_function_identifiers():
    body = EApply(EFunSig(F0), ())
    e = ELetrec((F0,), (FunDef((), body),), body)
    assert free_variables(e) == frozenset()
    assert free_variables(body) == {F0}


def test_case_patterns_bind_in_guard_and_body():
    clause = Clause(PVar("A"), EVar("A"), ETuple((EVar("A"), EVar("B"))))
    e = ECase(EVar("S"), (clause,))
    assert free_variables(e) == {"S", "B"}
