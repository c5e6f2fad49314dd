from lpterm.dp import (
    DPProblem, argument_filter_processor, cap, dependency_graph_processor, dependency_pairs,
    has_arc, tarjan,
)
from lpterm.refine import refine_basic
from lpterm.terms import ArgumentFilter, FreshVars, Rule, Symbol
from lpterm.transform import extend_initial_filter, transform_new
from lpterm.typeinfo import infer_types

from conftest import load
from strategies import fn

FG_DPS = [
    "P_in(f(X),g(Y)) -> P_in(f(X),f(Z))",
    "P_in(f(X),g(Y)) -> U1(p_in(f(X),f(Z)),X,Y)",
    "U1(p_out(f(X),f(Z)),X,Y) -> P_in(Z,g(Y))",
    "U1(p_out(f(X),f(Z)),X,Y) -> U2(p_in(Z,g(Y)),X,Y,Z)",
]


def fg_problem():
    program, spec = load("fg")
    trs = transform_new(program)
    pairs = dependency_pairs(trs)
    tuples = [t.sym for p in pairs for t in (p.lhs, p.rhs)]
    pi = refine_basic(trs, extend_initial_filter(trs, spec.initial_filter(program), tuples), "tb2",
                      infer_types(program))
    return trs, DPProblem(tuple(pairs), trs.rules, pi)


def test_dependency_pairs_fg():
    trs, problem = fg_problem()
    assert [str(p) for p in problem.pairs] == FG_DPS
    assert problem.names == ("D1", "D2", "D3", "D4")


def test_cap():
    trs, problem = fg_problem()
    defined = {r.lhs.sym for r in trs}
    capped = cap(problem.pairs[1].rhs, defined, FreshVars("_C"))
    assert str(capped) == "U1(_C1,X,Y)"
    again = cap(capped, defined, FreshVars("_C"))
    assert again == capped


def test_estimated_graph_fg():
    trs, problem = fg_problem()
    result = dependency_graph_processor(problem)
    arcs = {(i + 1, j + 1) for i, js in result.arcs.items() for j in js}
    assert arcs == {(3, 1), (3, 2), (2, 3), (2, 4)}
    assert result.components == ((1, 2),)
    assert [str(p) for p in result.subproblems[0].pairs] == FG_DPS[1:3]
    assert result.subproblems[0].names == ("D2", "D3")


def test_no_self_arc_for_first_pair():
    trs, problem = fg_problem()
    defined = {r.lhs.sym for r in trs}
    d1 = problem.pairs[0]
    assert not has_arc(d1, d1, defined, problem.filter)
    assert not has_arc(d1, problem.pairs[1], defined, problem.filter)


def test_arc_needs_finite_filtered_unifier():
    # P(Y,s(Y)) against P(X,X) only unifies with X = s(X)
    pair = Rule(fn("P", "X", "X"), fn("P", "Y", fn("s", "Y")))
    P, s = pair.lhs.sym, Symbol("s", 1)
    assert not has_arc(pair, pair, set(), ArgumentFilter({P: (1, 2), s: (1,)}))
    assert has_arc(pair, pair, set(), ArgumentFilter({P: (1, 2), s: ()}))
    assert has_arc(pair, pair, set(), ArgumentFilter({P: (), s: (1,)}))


def test_argument_filter_processor():
    trs, problem = fg_problem()
    sub = dependency_graph_processor(problem).subproblems[0]
    filtered = argument_filter_processor(sub)
    assert [str(p) for p in filtered.pairs] == [
        "P_in(f(X)) -> U1(p_in(f(X)),X)",
        "U1(p_out(f(X),f(Z)),X) -> P_in(Z)",
    ]
    assert filtered.names == ("D2'", "D3'")
    assert "p_in(X) -> p_out(X,X)" in [str(r) for r in filtered.rules]


def test_tarjan():
    edges = {0: [1], 1: [2], 2: [0], 3: [3], 4: [0]}
    assert tarjan(5, edges) == [[0, 1, 2], [3], [4]]
    assert tarjan(0, {}) == []


def test_canonical_is_stable():
    _, p1 = fg_problem()
    _, p2 = fg_problem()
    assert p1.canonical() == p2.canonical()
