import io

import pytest
import yaml

from core_erlang_semantics.config import paths
from core_erlang_semantics.entrypoints import (
    EXIT_EVAL_ERROR,
    EXIT_INVALID,
    EXIT_OK,
    CliInvocation,
    get_parser,
    main,
    run,
)
from core_erlang_semantics.eval import Success, evaluate

from tests.conftest import CORPUS_DIR


def corpus_file(name):
    return str(CORPUS_DIR / f"{name}.core")


def test_eval_prints_the_value(capsys):
    assert run(CliInvocation("eval", (corpus_file("let_binding"),))) == EXIT_OK
    assert capsys.readouterr().out == "5\n"


def test_eval_divergent_program(capsys):
    inv = CliInvocation("eval", (corpus_file("letrec_divergent"),), fuel=50)
    assert run(inv) == EXIT_EVAL_ERROR
    assert capsys.readouterr().out == "OutOfFuel\n"


def test_eval_with_bindings(capsys):
    inv = CliInvocation("eval", (corpus_file("swap_expressions_left"),), env_bindings="Z=10")
    assert run(inv) == EXIT_OK
    assert capsys.readouterr().out == "17\n"


def test_eval_with_bad_bindings(capsys):
    inv = CliInvocation("eval", (corpus_file("let_binding"),), env_bindings="Z")
    assert run(inv) == EXIT_INVALID
    assert capsys.readouterr().err


def test_eval_parse_error(tmp_path, capsys):
    source = tmp_path / "broken.core"
    source.write_text("let X = in X", encoding="utf-8")
    assert run(CliInvocation("eval", (str(source),))) == EXIT_INVALID
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "broken.core" in captured.err


def test_eval_output_is_repeatable(capsys):
    inv = CliInvocation("eval", (corpus_file("sum_list"), corpus_file("map")))
    run(inv)
    first = capsys.readouterr().out
    run(inv)
    assert capsys.readouterr().out == first


def test_parse_prints_canonical_form(capsys):
    assert run(CliInvocation("parse", (corpus_file("let_binding"),))) == EXIT_OK
    assert capsys.readouterr().out == "let X = 5 in X\n"


def test_invocation_rejects_non_positive_fuel():
    with pytest.raises(ValueError):
        CliInvocation("eval", ("x.core",), fuel=0)


def test_trace_then_check(tmp_path, capsys):
    out = tmp_path / "let_binding.deriv"
    inv = CliInvocation("trace", (corpus_file("let_binding"),), out=out)
    assert run(inv) == EXIT_OK
    assert capsys.readouterr().out == "5\n"
    assert run(CliInvocation("check", (str(out),))) == EXIT_OK
    assert capsys.readouterr().out == "valid\n"


def test_trace_without_out_writes_yaml_to_stdout(capsys, monkeypatch):
    assert run(CliInvocation("trace", (corpus_file("closure_capture"),))) == EXIT_OK
    text = capsys.readouterr().out
    doc = yaml.safe_load(text)
    assert doc["nodes"][doc["root"]]["rule"] == 9
    monkeypatch.setattr("sys.stdin", io.StringIO(text))
    assert run(CliInvocation("check", ("-",))) == EXIT_OK


def test_trace_tree(capsys):
    inv = CliInvocation("trace", (corpus_file("let_binding"),), tree=True)
    assert run(inv) == EXIT_OK
    assert capsys.readouterr().out.count("\n") == 3


def test_pipeline_for_every_terminating_corpus_program(corpus, tmp_path, capsys):
    checked = 0
    for name, expr in corpus.items():
        if not isinstance(evaluate(expr), Success):
            continue
        out = tmp_path / f"{name}.deriv"
        assert run(CliInvocation("trace", (corpus_file(name),), out=out)) == EXIT_OK
        assert run(CliInvocation("check", (str(out),))) == EXIT_OK, name
        checked += 1
    capsys.readouterr()
    assert checked >= 10


def test_check_reports_violations(tmp_path, capsys):
    out = tmp_path / "let.deriv"
    run(CliInvocation("trace", (corpus_file("let_binding"),), out=out))
    doc = yaml.safe_load(out.read_text(encoding="utf-8"))
    doc["values"][doc["values"].index({"int": 5})] = {"int": 6}
    out.write_text(yaml.safe_dump(doc, sort_keys=False), encoding="utf-8")
    capsys.readouterr()
    assert run(CliInvocation("check", (str(out),))) == EXIT_INVALID
    assert capsys.readouterr().out.startswith("invalid (")


def test_check_malformed_file(tmp_path, capsys):
    out = tmp_path / "junk.deriv"
    out.write_text("- not a node\n", encoding="utf-8")
    assert run(CliInvocation("check", (str(out),))) == EXIT_INVALID


def test_equiv_manifests(capsys):
    assert run(CliInvocation("equiv", (str(paths.equivalences_manifest),))) == EXIT_OK
    assert "swap-values" in capsys.readouterr().out
    inv = CliInvocation("equiv", (str(paths.divergent_manifest),), fuel=200)
    assert run(inv) == EXIT_INVALID
    assert "divergent" in capsys.readouterr().out


def test_main_exits_with_the_status(capsys):
    with pytest.raises(SystemExit) as exc_info:
        main(["-q", "eval", "--fuel", "100", corpus_file("static_binding")])
    assert exc_info.value.code == EXIT_OK
    assert capsys.readouterr().out == "5\n"


def test_parser_rejects_zero_fuel(capsys):
    with pytest.raises(SystemExit):
        get_parser().parse_args(["eval", "--fuel", "0", "x.core"])


def test_evaluator_errors_are_not_reported_as_bad_bindings(monkeypatch):
    def broken(*args, **kwargs):
        raise ValueError("evaluator bug")

    monkeypatch.setattr("core_erlang_semantics.entrypoints.eval_expr", broken)
    inv = CliInvocation("eval", (corpus_file("let_binding"),), env_bindings="Z=10")
    with pytest.raises(ValueError, match="evaluator bug"):
        run(inv)


def test_deep_result_through_trace_and_check(tmp_path, capsys):
    source = tmp_path / "build.core"
    source.write_text(
        "letrec 'build'/1 = fun(N) ->\n"
        "    case N of 0 -> [] M -> [M | apply 'build'/1(call 'plus'(M, -1))] end\n"
        "in apply 'build'/1(2000)\n",
        encoding="utf-8",
    )
    assert run(CliInvocation("eval", (str(source),))) == EXIT_OK
    printed = capsys.readouterr().out
    assert printed.startswith("[2000|[1999|")
    assert printed.endswith("[1|[]]" + "]" * 1999 + "\n")
    out = tmp_path / "build.deriv"
    assert run(CliInvocation("trace", (str(source),), out=out)) == EXIT_OK
    capsys.readouterr()
    assert run(CliInvocation("check", (str(out),))) == EXIT_OK
    assert capsys.readouterr().out == "valid\n"
