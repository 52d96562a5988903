from pathlib import Path
from typing import Dict

from hypothesis import settings
import pytest

from core_erlang_semantics.ast import Expression
from core_erlang_semantics.config import paths
from core_erlang_semantics.eval import DerivationNode, Success, evaluate
from core_erlang_semantics.parser import parse_file

settings.register_profile("reproducible", derandomize=True)
settings.load_profile("reproducible")

CORPUS_DIR: Path = paths.corpus_dir

GOLDEN_PROGRAMS = (
    "let_binding",
    "closure_capture",
    "static_binding",
    "recursion_listing",
    "swap_values_left",
    "swap_values_right",
    "case_guard",
    "map",
    "sum_list",
    "even_odd",
)


def corpus_program(name: str) -> Expression:
    return parse_file(CORPUS_DIR / f"{name}.core")


@pytest.fixture(scope="session")
def corpus() -> Dict[str, Expression]:
    return {path.stem: parse_file(path) for path in sorted(CORPUS_DIR.glob("*.core"))}


@pytest.fixture(scope="session")
def golden_trees() -> Dict[str, DerivationNode]:
    trees = {}
    for name in GOLDEN_PROGRAMS:
        outcome = evaluate(corpus_program(name))
        assert isinstance(outcome, Success), name
        trees[name] = outcome.derivation
    return trees
