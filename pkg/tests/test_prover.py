import json

import pytest

from lpterm import TERMINATING, UNKNOWN, Config, prove
from lpterm.errors import NotWellModed
from lpterm.parser import parse_program
from lpterm.polyorder import Interpretation, verify_reduction_pair
from lpterm.prover import build_problem

from conftest import load


def run(name, **kw):
    program, spec = load(name)
    return prove(program, spec, Config(**kw))


def test_fg_proof_structure():
    proof = run("fg")
    assert proof.verdict == TERMINATING
    text = proof.text()
    assert "SCC {D2,D3} -> P1.1" in text
    rp = [s for s in proof.steps if s.processor == "Reduction pair processor"]
    assert rp and "D3" in rp[0].data["removed"]
    assert text.endswith("Result: TERMINATING\n")


def test_fg_witness_reverifies_from_json():
    proof = run("fg")
    data = proof.to_json()
    step = next(s for s in data["steps"] if s["processor"] == "Reduction pair processor")
    problem = proof.problems[step["problem"]]
    by_name = {str(f): f for r in problem.pairs + problem.rules for f in r.symbols()}
    interp = Interpretation({by_name[k]: tuple(v) for k, v in step["interpretation"].items()})
    strict = [problem.names.index(n) for n in step["removed"]]
    assert verify_reduction_pair(problem.pairs, problem.rules, problem.filter, interp, strict)


def test_fg_without_mode_splitting():
    assert run("fg", mode_splitting=False).verdict == TERMINATING


@pytest.mark.parametrize("heuristic", ["im", "om"])
def test_fg_with_dp_scanning_heuristics_under_mode_splitting(heuristic):
    # im/om also scan dependency pairs and filter too much here
    assert run("fg", heuristic=heuristic).verdict == UNKNOWN


def test_classical_requires_well_moded():
    with pytest.raises(NotWellModed):
        run("fg_open", classical=True)


def test_classical_fg_is_unknown():
    proof = run("fg", classical=True)
    assert proof.verdict == UNKNOWN
    assert [str(r) for r in proof.trs] == [
        "p_in(X) -> p_out(X)",
        "p_in(f(X)) -> u1(p_in(f(X)),X)",
        "u1(p_out(f(Z)),X) -> u2(p_in(Z),X,Z)",
        "u2(p_out(g(Y)),X,Z) -> p_out(g(Y))",
    ]


def test_classical_uses_filter_as_moding():
    assert run("ordered", classical=True).verdict == UNKNOWN


def test_program_without_query_assumes_ground_arguments():
    program = parse_program("nat(0).\nnat(s(X)) :- nat(X).\n")
    assert prove(program).verdict == TERMINATING


def test_timeout_gives_unknown():
    proof = run("rotate", timeout=1e-9)
    assert proof.verdict == UNKNOWN
    assert proof.reason == "timeout"
    assert "Result: UNKNOWN (timeout)" in proof.text()


def test_processor_limit():
    proof = run("fg", max_steps=1)
    assert proof.verdict == UNKNOWN
    assert proof.reason == "processor limit reached"


def test_config_validation():
    for bad in ({"heuristic": "xx"}, {"max_coeff": 0}, {"max_coeff": 6}, {"timeout": 0}, {"proof_format": "xml"}):
        with pytest.raises(ValueError):
            Config(**bad)


def test_config_env_overrides():
    env = {"LPTERM_HEURISTIC": "tb", "LPTERM_MODE_SPLITTING": "off", "LPTERM_MAX_COEFF": "3",
           "LPTERM_TIMEOUT": "5"}
    cfg = Config().with_env(env)
    assert (cfg.heuristic, cfg.mode_splitting, cfg.max_coeff, cfg.timeout) == ("tb", False, 3, 5.0)


def test_build_problem_returns_refined_trs():
    program, spec = load("rotate")
    trs, refined, pi = build_problem(program, spec, Config())
    assert len(trs) == 6 and len(refined) == 18


def test_json_is_serialisable_and_stable():
    a = json.dumps(run("safeinv").to_json(), sort_keys=True)
    b = json.dumps(run("safeinv").to_json(), sort_keys=True)
    assert a == b
    assert json.loads(a)["verdict"] == TERMINATING
