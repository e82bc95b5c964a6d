"""End-to-end command-line behaviour, run in-process."""

import io
import json

import pytest

from loopinv.cli import main

WRONG_INVARIANT = """{n >= 0}
x := 0;
y := 1;
WHILE x < n DO
{y = k ^ n}
BEGIN
  x := x + 1;
  y := y * k
END
{y = k ^ n}"""

COUNT_UP = "{n >= 0} x := 0; WHILE x < n DO x := x + 1 {x = n}"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_discover_text_output(capsys, programs):
    code, out, _ = run(capsys, "discover", str(programs / "exp_simple.imp"))
    assert code == 0
    assert "loop at line 5:" in out
    assert "invariant: x+g3=n ∧ y*g4=k^n" in out
    assert "generalisation variables: g3, g4" in out
    assert "g3: initial n, step g3-1, final 0" in out
    assert "g4: initial k^n, step g4/k, final 1" in out
    assert "verdict: verified up to bound 6" in out


def test_discover_json_output(capsys, programs):
    code, out, _ = run(
        capsys, "discover", str(programs / "exp_simple.imp"), "--format", "json"
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["warnings"] == []
    (loop,) = doc["loops"]
    assert loop["location"] == 5
    assert loop["genvars"] == ["g3", "g4"]
    assert loop["assignment"]["initial"] == {"g3": "n", "g4": "k^n"}
    assert loop["assignment"]["step"] == {"g3": "g3-1", "g4": "g4/k"}
    assert loop["assignment"]["final"] == {"g3": "0", "g4": "1"}
    assert loop["verdict"] == {"kind": "VerifiedUpToBound", "bound": 6}
    assert loop["trace"][0]["kind"] == "Init"
    assert all(set(s) == {"kind", "formula", "note"} for s in loop["trace"])


def test_discover_swapped_warns_and_fails(capsys, programs):
    code, out, _ = run(capsys, "discover", str(programs / "exp_swapped.imp"))
    assert code == 2
    assert "error: no witnesses (requirement 1)" in out
    assert (
        "warning: variable 'y' is updated in the loop body but absent from "
        "the invariant; its updates were generalised away" in out
    )


def test_discover_nested_reports_both_loops(capsys, programs):
    code, out, _ = run(capsys, "discover", str(programs / "exp_nested.imp"))
    assert code == 0
    assert "loop at line 7:" in out
    assert "loop at line 11:" in out
    assert out.count("verdict: verified up to bound 6") == 2


def test_trace_numbers_steps(capsys, programs):
    code, out, _ = run(capsys, "trace", str(programs / "exp_simple.imp"))
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "loop at line 5:"
    assert lines[1].startswith("  1. [Init] ")
    assert lines[1].endswith("-- negated guard conjoined with the postcondition")
    assert "[GeneraliseStep]" in out and "[RenamingFound]" in out


def test_trace_rules_can_be_disabled(capsys, programs):
    _, default_out, _ = run(capsys, "trace", str(programs / "exp_simple.imp"))
    assert "x+1=n ∧ y*k=k^n" in default_out
    _, thinned, _ = run(
        capsys, "trace", str(programs / "exp_simple.imp"), "--no-rule", "R3"
    )
    assert "x+1=n ∧ y*k=k^n" not in thinned


def test_iteration_budget_surfaces_as_error(capsys, programs):
    code, out, _ = run(
        capsys, "discover", str(programs / "exp_simple.imp"), "--max-iter", "2"
    )
    assert code == 2
    assert "IterationBudget" in out


def test_verify_annotated_program(capsys, programs):
    code, out, _ = run(capsys, "verify", str(programs / "exp_simple_annotated.imp"))
    assert code == 0
    assert "global condition: holds on all stores with values <= 6" in out
    for name in ("establishment", "preservation", "sufficiency"):
        assert f"loop at line 6: {name} holds" in out


def test_verify_reports_counterexamples(capsys, tmp_path):
    target = tmp_path / "wrong.imp"
    target.write_text(WRONG_INVARIANT, encoding="utf-8")
    code, out, _ = run(capsys, "verify", str(target))
    assert code == 1
    assert "global condition: fails at k=0 n=1" in out
    assert "loop at line 4: establishment fails at k=0 n=1 x=0 y=1" in out
    assert "loop at line 4: sufficiency holds" in out


def test_verify_requires_annotations(capsys, programs):
    code, _, err = run(capsys, "verify", str(programs / "exp_simple.imp"))
    assert code == 2
    assert "has no {invariant} annotation; run discover first" in err


def test_verify_rejects_uninstantiated_genvars(capsys, tmp_path):
    target = tmp_path / "genvar.imp"
    target.write_text(
        "{n >= 0} x := 0; WHILE x < n DO {x + g = n} x := x + 1 {x = n}",
        encoding="utf-8",
    )
    code, _, err = run(capsys, "verify", str(target))
    assert code == 2
    assert "generalisation variables must be instantiated" in err
    assert "mentions g" in err


def test_verify_json_report(capsys, programs):
    code, out, _ = run(
        capsys, "verify", str(programs / "exp_simple_annotated.imp"), "--format", "json"
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["bound"] == 6
    assert doc["global"] == {"holds": True, "counterexample": None}
    (entry,) = doc["loops"]
    assert entry["location"] == 6
    assert all(res["holds"] for res in entry["conditions"].values())


def test_stdin_input(capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO(COUNT_UP))
    code, out, _ = run(capsys, "discover", "-")
    assert code == 0
    assert "verdict: verified up to bound 6" in out


def test_missing_file_is_bad_input(capsys, tmp_path):
    code, _, err = run(capsys, "discover", str(tmp_path / "nope.imp"))
    assert code == 3
    assert "cannot read" in err


def test_parse_error_is_bad_input(capsys, tmp_path):
    target = tmp_path / "broken.imp"
    target.write_text("{n >= 0} WHILE x < {x = n}", encoding="utf-8")
    code, _, err = run(capsys, "discover", str(target))
    assert code == 3
    assert "parse error:" in err


def test_seed_variable_is_rejected(capsys, monkeypatch, programs):
    monkeypatch.setenv("LOOPINV_SEED", "42")
    code, _, err = run(capsys, "discover", str(programs / "exp_simple.imp"))
    assert code == 2
    assert "deterministic" in err


def test_bound_flag_reaches_verdict(capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO(COUNT_UP))
    code, out, _ = run(capsys, "discover", "-", "--bound", "3")
    assert code == 0
    assert "verdict: verified up to bound 3" in out
