"""Command-line behaviour: exit codes, output routing, JSON contracts."""

import json
import subprocess
import sys

import pytest

from stml.cli import main

from conftest import ANNOTATED, CORPUS, STEPS, read
from schema_utils import validate

SCRIPT_FILE = CORPUS / "scripts" / "axpby.script"

PURE_GATE = """
rule PureGate {
  pattern: {
    cexpr(l) = cexpr(e);
  }
  condition: {
    pure(cexpr(e));
  }
  generate: {
    cexpr(l) = cexpr(e);
  }
}
"""


@pytest.fixture(autouse=True)
def isolated_rule_env(monkeypatch):
    monkeypatch.delenv("STML_RULE_PATH", raising=False)


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- transform ----------------------------------------------------------------


def test_transform_scripted_writes_final_code(tmp_path, capsys):
    out = tmp_path / "final.c"
    code, stdout, _ = run(
        ["transform", str(STEPS[0]),
         "--oracle", f"scripted:{SCRIPT_FILE}", "--out", str(out)],
        capsys,
    )
    assert code == 0
    assert out.read_text() == read(STEPS[5])
    report = json.loads(stdout)
    validate(report, "report")
    assert report["status"] == "final"
    assert [s["rule"] for s in report["steps"]] == [
        "For-LoopFusion", "AugAdditionAssign", "JoinAssignments",
        "UndoDistribute", "LoopInvCodeMotion",
    ]


def test_transform_without_out_prints_code_only(capsys):
    code, stdout, _ = run(
        ["transform", str(STEPS[0]), "--oracle", f"scripted:{SCRIPT_FILE}"],
        capsys,
    )
    assert code == 0
    assert stdout == read(STEPS[5])  # no report mixed into the code


def test_transform_budget_exhaustion_exits_2(tmp_path, capsys):
    out = tmp_path / "partial.c"
    code, stdout, _ = run(
        ["transform", str(STEPS[0]), "--oracle", f"scripted:{SCRIPT_FILE}",
         "--budget", "2", "--out", str(out)],
        capsys,
    )
    assert code == 2
    assert out.read_text() == read(STEPS[2])
    report = json.loads(stdout)
    validate(report, "report")
    assert report["status"] == "budget-exhausted"
    assert len(report["steps"]) == 2


def test_transform_greedy_stops_at_local_minimum(capsys):
    code, stdout, _ = run(
        ["transform", str(CORPUS / "eval" / "local_minimum.c"),
         "--oracle", "greedy"],
        capsys,
    )
    assert code == 0
    assert stdout == read(CORPUS / "eval" / "local_minimum.c")


def test_transform_lookahead_escapes_it(capsys):
    code, stdout, _ = run(
        ["transform", str(CORPUS / "eval" / "local_minimum.c"),
         "--oracle", "lookahead:2"],
        capsys,
    )
    assert code == 0
    assert stdout != read(CORPUS / "eval" / "local_minimum.c")
    assert "(a + b) * v[i]" in stdout


def test_missing_input_exits_1_with_json_error(capsys):
    code, _, stderr = run(["transform", "no/such/file.c"], capsys)
    assert code == 1
    err = json.loads(stderr)
    validate(err, "error")
    assert err["error"] == "FileError"


def test_unknown_oracle_spec_rejected(capsys):
    code, _, stderr = run(
        ["transform", str(STEPS[0]), "--oracle", "psychic"], capsys
    )
    assert code == 1
    assert json.loads(stderr)["error"] == "StmlError"


def test_unreplayable_script_exits_1(tmp_path, capsys):
    script = tmp_path / "bad.script"
    script.write_text("UndoDistribute\n")
    code, _, stderr = run(
        ["transform", str(STEPS[0]), "--oracle", f"scripted:{script}"],
        capsys,
    )
    assert code == 1
    assert json.loads(stderr)["error"] == "NoViableCandidate"


# -- rule resolution ----------------------------------------------------------


def test_rules_flag_overrides_defaults(tmp_path, capsys):
    rule_file = tmp_path / "gate.stml"
    rule_file.write_text(PURE_GATE)
    src = tmp_path / "prog.c"
    src.write_text("int c;\nc += 1;\n")
    code, stdout, _ = run(
        ["matches", str(src), "--rules", str(rule_file)], capsys
    )
    assert code == 0
    assert json.loads(stdout) == []  # default rules are not in play


def test_duplicate_rules_across_files_rejected(tmp_path, capsys):
    rule_file = tmp_path / "gate.stml"
    rule_file.write_text(PURE_GATE)
    code, _, stderr = run(
        ["matches", str(STEPS[0]),
         "--rules", str(rule_file), "--rules", str(rule_file)],
        capsys,
    )
    assert code == 1
    assert json.loads(stderr)["error"] == "RuleSyntaxError"


def test_rule_path_env_var_is_honoured(tmp_path, capsys, monkeypatch):
    (tmp_path / "only.stml").write_text(PURE_GATE)
    monkeypatch.setenv("STML_RULE_PATH", str(tmp_path))
    src = tmp_path / "prog.c"
    src.write_text("int x, a;\nx = a + 1;\n")
    code, stdout, _ = run(["matches", str(src)], capsys)
    assert code == 0
    out = json.loads(stdout)
    assert [m["rule"] for m in out] == ["PureGate"]


def test_empty_rule_path_dir_is_an_error(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("STML_RULE_PATH", str(tmp_path))
    code, _, stderr = run(["matches", str(STEPS[0])], capsys)
    assert code == 1
    assert json.loads(stderr)["error"] == "FileError"


# -- matches ------------------------------------------------------------------


def test_matches_lists_applications_with_schema(capsys):
    code, stdout, _ = run(["matches", str(STEPS[0])], capsys)
    assert code == 0
    out = json.loads(stdout)
    assert any(m["rule"] == "For-LoopFusion" for m in out)
    for m in out:
        validate(m, "match")


def test_matches_empty_when_nothing_applies(capsys):
    code, stdout, _ = run(
        ["matches", str(CORPUS / "eval" / "p17_while_countdown.c")], capsys
    )
    assert code == 0
    assert json.loads(stdout) == []


def test_sidecar_facts_flip_a_verdict(tmp_path, capsys):
    rule_file = tmp_path / "gate.stml"
    rule_file.write_text(PURE_GATE)
    src = tmp_path / "prog.c"
    src.write_text("int x, a;\nx = f(a);\n")

    code, stdout, _ = run(
        ["matches", str(src), "--rules", str(rule_file)], capsys
    )
    (before,) = json.loads(stdout)
    assert before["certainty"] == "Unknown-conditions"

    sidecar = tmp_path / "facts.txt"
    sidecar.write_text(f"{src}:2: #pragma stml pure f\n")
    code, stdout, _ = run(
        ["matches", str(src), "--rules", str(rule_file),
         "--properties", str(sidecar)],
        capsys,
    )
    (after,) = json.loads(stdout)
    assert after["certainty"] == "Proven"


def test_bad_sidecar_anchor_exits_1(tmp_path, capsys):
    sidecar = tmp_path / "facts.txt"
    sidecar.write_text("prog.c:99: #pragma stml pure f\n")
    code, _, stderr = run(
        ["matches", str(STEPS[0]), "--properties", str(sidecar)], capsys
    )
    assert code == 1
    assert json.loads(stderr)["error"] == "AnchorError"


# -- lower --------------------------------------------------------------------


def test_lower_emits_derived_facts(capsys):
    code, stdout, _ = run(["lower", str(ANNOTATED / "map.c")], capsys)
    assert code == 0
    stml_lines = [
        ln for ln in stdout.splitlines() if ln.startswith("#pragma stml")
    ]
    assert len(stml_lines) == 6


def test_lower_is_idempotent(tmp_path, capsys):
    first = tmp_path / "once.c"
    code, _, _ = run(
        ["lower", str(ANNOTATED / "map.c"), "--out", str(first)], capsys
    )
    assert code == 0
    code, stdout, _ = run(["lower", str(first)], capsys)
    assert code == 0
    assert stdout == first.read_text()


# -- module entry point -------------------------------------------------------


def test_python_dash_m_matches_in_process_output(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "stml", "transform", str(STEPS[0]),
         "--oracle", f"scripted:{SCRIPT_FILE}"],
        capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0
    assert proc.stdout == read(STEPS[5])
