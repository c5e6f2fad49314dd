import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpterm.dp import dependency_pairs
from lpterm.errors import NoChoice
from lpterm.parser import parse_program
from lpterm.refine import (
    HEURISTICS, check_variable_condition, first_violation, heuristic_choose, refine_basic,
    refine_modesplit, unlabel,
)
from lpterm.terms import App, ArgumentFilter, full_filter, positions, subterm
from lpterm.transform import extend_initial_filter, transform_new
from lpterm.typeinfo import infer_types

from conftest import load
from strategies import programs, terms


def _fg():
    program, _ = load("fg")
    return program, transform_new(program), infer_types(program)


@pytest.mark.parametrize("heuristic, expected", [
    ("im", ("f", 1)), ("om", ("u1", 1)), ("om2", ("p", 2)), ("tb", ("p", 2)), ("tb2", ("p", 2)),
])
def test_heuristic_choices_on_fg(heuristic, expected):
    _, trs, types = _fg()
    rhs = trs.rules[1].rhs
    assert str(rhs) == "u1(p_in(f(X),f(Z)),X,Y)"
    f, i = heuristic_choose(heuristic, rhs, (1, 2, 1), types)
    assert (f.name, i) == expected


def test_tb_skips_reflexive_positions_only():
    _, trs, types = _fg()
    rhs = trs.rules[3].rhs
    assert str(rhs) == "p_out(f(X),g(Y))"
    f, i = heuristic_choose("tb", rhs, (2, 1), types)
    assert (f.name, i) == ("g", 1)


def test_root_position_has_no_choice():
    _, trs, types = _fg()
    with pytest.raises(NoChoice):
        heuristic_choose("tb2", trs.rules[1].rhs, (), types)


def test_first_violation():
    _, trs, _ = _fg()
    pi = full_filter(trs.signature())
    assert first_violation(trs.rules[0], pi) is None
    assert first_violation(trs.rules[1], pi) == (1, 2, 1)
    assert check_variable_condition(trs.rules, pi) == [(1, (1, 2, 1))]


FG_BASIC = {
    "im": ["pi(f) = {}", "pi(g) = {1}", "pi(p_in) = {2}", "pi(p_out) = {1,2}", "pi(u1) = {1,3}",
           "pi(u2) = {1,3}", "pi(P_in) = {2}", "pi(U1) = {1,3}", "pi(U2) = {1,3}"],
    "om": ["pi(f) = {1}", "pi(g) = {1}", "pi(p_in) = {1,2}", "pi(p_out) = {1,2}", "pi(u1) = {2,3}",
           "pi(u2) = {2,3}", "pi(P_in) = {}", "pi(U1) = {}", "pi(U2) = {}"],
}
for _h in ("om2", "tb", "tb2"):
    FG_BASIC[_h] = ["pi(f) = {1}", "pi(g) = {1}", "pi(p_in) = {1}", "pi(p_out) = {1,2}", "pi(u1) = {1,2}",
                      "pi(u2) = {1,2,4}", "pi(P_in) = {1}", "pi(U1) = {1,2}", "pi(U2) = {1,2,4}"]


@pytest.mark.parametrize("heuristic", HEURISTICS)
def test_refine_basic_fg_from_full_filter(heuristic):
    _, trs, types = _fg()
    tuples = [t.sym for p in dependency_pairs(trs) for t in (p.lhs, p.rhs)]
    pi = refine_basic(trs, full_filter(list(trs.signature()) + tuples), heuristic, types)
    assert pi.lines() == FG_BASIC[heuristic]
    assert check_variable_condition(trs.rules, pi) == []


def test_refine_basic_fg_query_filter():
    program, trs, types = _fg()
    _, spec = load("fg")
    tuples = [t.sym for p in dependency_pairs(trs) for t in (p.lhs, p.rhs)]
    pi0 = extend_initial_filter(trs, spec.initial_filter(program), tuples)
    pi = refine_basic(trs, pi0, "tb2", types)
    assert pi.lines() == FG_BASIC["tb2"]


ROTATE_FILTER = {
    "'.'": (2,), "[]": (),
    "append_in": (1, 2, 3), "append_in^{1,2}": (1, 2), "append_in^{2,3}": (2, 3), "append_in^{3}": (3,),
    "append_out": (1, 2, 3), "append_out^{1,2}": (1, 2, 3), "append_out^{2,3}": (1, 2, 3),
    "append_out^{3}": (1, 2, 3),
    "rotate_in": (1, 2), "rotate_in^{1}": (1,), "rotate_out": (1, 2), "rotate_out^{1}": (1, 2),
    "u1": (1, 3, 4, 5), "u1^{1,2}": (1, 3, 4), "u1^{2,3}": (1, 4, 5), "u1^{3}": (1, 5),
    "u2": (1, 2, 3), "u2^{1}": (1, 2),
    # u3's extra arguments are N,O,L,M (first occurrence order)
    "u3": (1, 2, 3, 4, 5), "u3^{1}": (1, 2, 4, 5),
}


def _rotate():
    program, spec = load("rotate")
    trs = transform_new(program)
    refined, pi = refine_modesplit(trs, spec.initial_filter(program), "tb2", infer_types(program))
    return trs, refined, pi


def test_rotate_mode_splitting_filter():
    trs, refined, pi = _rotate()
    got = {str(f): v for f, v in pi.items() if f.kind != "tuple"}
    assert got == ROTATE_FILTER
    tuples = {str(f): v for f, v in pi.items() if f.kind == "tuple"}
    for f, v in tuples.items():
        assert got[f[0].lower() + f[1:]] == v


def test_rotate_refined_trs():
    trs, refined, pi = _rotate()
    assert len(refined) == 18
    rules = [str(r) for r in refined]
    assert "rotate_in^{1}(N,O) -> u2^{1}(append_in^{3}(L,M,N),N,O)" in rules
    assert "u2^{1}(append_out^{3}(L,M,N),N,O) -> u3^{1}(append_in^{1,2}(M,L,O),N,O,L,M)" in rules
    assert "append_in^{1,2}('.'(X,L),M,'.'(X,N)) -> u1^{1,2}(append_in^{1,2}(L,M,N),X,L,M,N)" in rules
    assert check_variable_condition(refined.rules, pi) == []
    assert unlabel(refined) == trs


def test_modesplit_fg_labels():
    program, trs, types = _fg()
    _, spec = load("fg")
    refined, pi = refine_modesplit(trs, spec.initial_filter(program), "tb2", types)
    assert len(refined) == 8
    assert unlabel(refined) == trs
    lines = pi.lines()
    assert "pi(p_in^{1}) = {1}" in lines and "pi(g) = {}" in lines


def _random_filter(rng: random.Random, program) -> ArgumentFilter:
    entries = {}
    for f in program.functions + program.predicates:
        entries[f] = [i for i in range(1, f.arity + 1) if rng.random() < 0.7]
    return ArgumentFilter(entries)


@settings(max_examples=1000)
@given(programs(), st.integers(0, 2**32 - 1), st.sampled_from(HEURISTICS))
def test_refinement_establishes_variable_condition(text, seed, heuristic):
    program = parse_program(text)
    trs = transform_new(program)
    types = infer_types(program)
    pi0 = _random_filter(random.Random(seed), program)
    tuples = [t.sym for p in dependency_pairs(trs) for t in (p.lhs, p.rhs)]
    pi = refine_basic(trs, extend_initial_filter(trs, pi0, tuples), heuristic, types)
    assert check_variable_condition(trs.rules, pi) == []
    refined, pi2 = refine_modesplit(trs, pi0, heuristic, types)
    assert check_variable_condition(refined.rules, pi2) == []
    # R_P may repeat a rule when the program repeats a clause; compare as sets
    assert set(unlabel(refined).rules) == set(trs.rules)
    for p in dependency_pairs(refined):
        assert p.lhs.sym in pi2 and p.rhs.sym in pi2


@settings(max_examples=1000)
@given(terms(4), st.sampled_from(HEURISTICS), st.data())
def test_heuristic_prefix_contract(t, heuristic, data):
    pos = data.draw(st.sampled_from([q for q in positions(t) if q]))
    types = _random_types(t, data)
    f, i = heuristic_choose(heuristic, t, pos, types)
    assert any(subterm(t, pos[:k]).sym == f and pos[k] == i for k in range(len(pos)))


class _Types:
    def __init__(self, reflexive, unbounded):
        self._r, self._u = reflexive, unbounded

    def reflexive(self, f):
        return self._r.get(f, frozenset())

    def unbounded(self, f):
        return self._u.get(f, frozenset())


def _random_types(t, data):
    syms = sorted({s.sym for s in (subterm(t, q) for q in positions(t)) if isinstance(s, App)}, key=str)
    sets = st.frozensets(st.integers(1, 3))
    return _Types({f: data.draw(sets) for f in syms}, {f: data.draw(sets) for f in syms})
