import pytest

from core_erlang_semantics.ast import (
    Atom,
    Clause,
    ELiteral,
    EmptyList,
    EVar,
    Integer,
    PList,
    PLiteral,
    PTuple,
    PVar,
)
from core_erlang_semantics.match import match_clause, match_pattern
from core_erlang_semantics.values import VList, VLiteral, VTuple

ONE = VLiteral(Integer(1))
TWO = VLiteral(Integer(2))
NIL = VLiteral(EmptyList())
TRUE = ELiteral(Atom("true"))


def test_variable_matches_anything():
    assert match_pattern(VTuple((ONE,)), PVar("X")) == (("X", VTuple((ONE,))),)


def test_literal_pattern():
    assert match_pattern(ONE, PLiteral(Integer(1))) == ()
    assert match_pattern(TWO, PLiteral(Integer(1))) is None
    assert match_pattern(VTuple(()), PLiteral(Integer(1))) is None


def test_list_pattern_binds_head_then_tail():
    value = VList(ONE, VList(TWO, NIL))
    pattern = PList(PVar("H"), PVar("T"))
    assert match_pattern(value, pattern) == (("H", ONE), ("T", VList(TWO, NIL)))
    assert match_pattern(NIL, pattern) is None


def test_tuple_pattern_needs_same_size():
    pattern = PTuple((PVar("A"), PVar("B")))
    assert match_pattern(VTuple((ONE, TWO)), pattern) == (("A", ONE), ("B", TWO))
    assert match_pattern(VTuple((ONE,)), pattern) is None
    assert match_pattern(VList(ONE, TWO), pattern) is None


def test_nested_mismatch_fails_whole_match():
    pattern = PTuple((PVar("A"), PLiteral(Integer(2))))
    assert match_pattern(VTuple((ONE, ONE)), pattern) is None


CLAUSES = (
    Clause(PLiteral(Integer(1)), TRUE, ELiteral(Atom("one"))),
    Clause(PVar("N"), EVar("N"), EVar("N")),
)


def test_match_clause_returns_guard_body_and_bindings():
    assert match_clause(ONE, CLAUSES, 0) == (TRUE, ELiteral(Atom("one")), ())
    assert match_clause(TWO, CLAUSES, 1) == (EVar("N"), EVar("N"), (("N", TWO),))


@pytest.mark.parametrize("index", [-1, 2, 10])
def test_match_clause_out_of_range(index):
    assert match_clause(ONE, CLAUSES, index) is None


def test_match_clause_no_match():
    assert match_clause(TWO, CLAUSES, 0) is None
