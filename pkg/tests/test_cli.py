import json
import shutil
import subprocess
import sys

import pytest

from lpterm.cli import config_from_args, build_parser, main

from conftest import PROGRAMS, ROOT


def run_main(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_prove_is_default_command(capsys):
    code, out, _ = run_main(capsys, str(PROGRAMS / "fg.pl"))
    assert code == 0
    assert "Result: TERMINATING" in out


def test_unknown_exit_code(capsys):
    code, out, _ = run_main(capsys, "prove", str(PROGRAMS / "ordered.pl"))
    assert code == 1
    assert "Result: UNKNOWN" in out


def test_missing_file_exit_code(capsys):
    code, _, err = run_main(capsys, str(PROGRAMS / "missing.pl"))
    assert code == 2
    assert err.startswith("lpterm: ")


def test_not_well_moded_is_an_error(capsys):
    code, _, err = run_main(capsys, str(PROGRAMS / "fg_open.pl"), "--classical")
    assert code == 2
    assert "NotWellModed" in err


def test_syntax_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.pl"
    bad.write_text("p(a.\n")
    code, _, err = run_main(capsys, str(bad))
    assert code == 2
    assert "LPSyntaxError" in err


def test_emit_trs(capsys):
    code, out, _ = run_main(capsys, str(PROGRAMS / "fg.pl"), "--classical", "--emit-trs")
    assert code == 0
    assert out.splitlines() == [
        "p_in(X) -> p_out(X)",
        "p_in(f(X)) -> u1(p_in(f(X)),X)",
        "u1(p_out(f(Z)),X) -> u2(p_in(Z),X,Z)",
        "u2(p_out(g(Y)),X,Z) -> p_out(g(Y))",
    ]


def test_emit_refined_trs(capsys):
    code, out, _ = run_main(capsys, str(PROGRAMS / "rotate.pl"), "--emit-trs")
    assert len(out.splitlines()) == 18


def test_json_output(capsys):
    code, out, _ = run_main(capsys, str(PROGRAMS / "append.pl"), "--proof-format", "json")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 1
    data = json.loads(lines[0])
    assert data["verdict"] == "TERMINATING"
    assert data["file"].endswith("append.pl")


def test_directory_table(tmp_path, capsys):
    for name in ("append", "ordered"):
        shutil.copy(PROGRAMS / f"{name}.pl", tmp_path)
    (tmp_path / "notes.txt").write_text("ignored")
    code, out, _ = run_main(capsys, str(tmp_path))
    assert code == 1
    lines = out.splitlines()
    assert lines[0].split() == ["file", "verdict", "time"]
    assert lines[1].split()[:2] == ["append.pl", "TERMINATING"]
    assert lines[2].split()[:2] == ["ordered.pl", "UNKNOWN"]
    assert lines[-1] == "Successes: 1  Failures: 1  Timeouts: 0"


def test_directory_json(tmp_path, capsys):
    shutil.copy(PROGRAMS / "append.pl", tmp_path)
    code, out, _ = run_main(capsys, str(tmp_path), "--proof-format", "json")
    records = [json.loads(line) for line in out.splitlines()]
    assert records[0]["verdict"] == "TERMINATING"
    assert records[-1] == {"summary": {"Successes": 1, "Failures": 0, "Timeouts": 0}}
    assert code == 0


def test_flags_override_environment():
    args = build_parser().parse_args(["prove", "x.pl", "--heuristic", "om2"])
    cfg = config_from_args(args, {"LPTERM_HEURISTIC": "tb", "LPTERM_MAX_COEFF": "4"})
    assert cfg.heuristic == "om2"
    assert cfg.max_coeff == 4


def test_mode_splitting_flag(capsys):
    code, out, _ = run_main(capsys, str(PROGRAMS / "rotate.pl"), "--mode-splitting", "off")
    assert code == 1
    assert "mode-splitting=off" in out


def test_bad_flag_value_exits_with_usage_error(capsys):
    with pytest.raises(SystemExit) as e:
        main([str(PROGRAMS / "fg.pl"), "--heuristic", "nope"])
    assert e.value.code == 2


def test_check_command(capsys):
    code, out, _ = run_main(capsys, "check", str(PROGRAMS / "append.pl"), "--samples", "10")
    assert code == 0
    assert "prover: TERMINATING" in out
    assert "depth-exceeded: 0" in out
    assert "0 failed" in out


def test_check_without_proof_never_reports_mismatch(capsys):
    code, out, _ = run_main(capsys, "check", str(PROGRAMS / "ordered.pl"), "--samples", "5",
                            "--depth-bound", "200")
    assert "prover: UNKNOWN" in out
    assert code == 0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "lpterm", str(PROGRAMS / "append.pl")],
                         capture_output=True, text=True, cwd=ROOT)
    assert res.returncode == 0
    assert "Result: TERMINATING" in res.stdout
