"""Dependency pairs, the estimated dependency graph and two processors.

A DP problem is a triple (pairs, rules, filter).  Chains are infinitary:
terms may be rational as long as every term is finite once filtered, so
graph arcs are computed with unification without occur check followed by
a finiteness test under the filter.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .errors import NoUnifier
from .terms import (
    App, ArgumentFilter, FreshVars, Rule, Symbol, Term, Var, apply_filter,
    full_filter, substitute, term_str, term_vars, unify_rational,
)


def mark(t: App) -> App:
    return App(t.sym.tuple_symbol(), t.args)


def dependency_pairs(rules: Iterable[Rule]) -> list[Rule]:
    """DP(R): one pair per defined-rooted subterm of a right-hand side.

    Subterms are visited innermost first, so the pair for a nested call
    precedes the pair for the enclosing one.
    """
    rules = list(rules)
    defined = {r.lhs.sym for r in rules}
    out: dict[Rule, None] = {}
    for r in rules:
        for t in _postorder(r.rhs):
            if isinstance(t, App) and t.sym in defined:
                out.setdefault(Rule(mark(r.lhs), mark(t), r.origin))
    return list(out)


def _postorder(t: Term) -> list[Term]:
    out: list[Term] = []
    stack: list[tuple[Term, bool]] = [(t, False)]
    while stack:
        s, done = stack.pop()
        if done or isinstance(s, Var):
            out.append(s)
            continue
        stack.append((s, True))
        for a in reversed(s.args):
            stack.append((a, False))
    return out


def cap(t: Term, defined: set[Symbol], fresh: FreshVars) -> Term:
    """Replace every maximal defined-rooted proper subterm by a fresh variable."""
    if isinstance(t, Var):
        return t

    def go(s: Term) -> Term:
        if isinstance(s, Var):
            return s
        if s.sym in defined:
            return fresh()
        return App(s.sym, [go(a) for a in s.args]) if s.args else s

    return App(t.sym, [go(a) for a in t.args]) if t.args else t


def _rename_apart(t: Term, fresh: FreshVars) -> Term:
    return substitute(t, {v: fresh() for v in term_vars(t)})


def has_arc(p: Rule, q: Rule, defined: set[Symbol], pi: ArgumentFilter) -> bool:
    fresh = FreshVars("_C")
    capped = cap(p.rhs, defined, fresh)
    target = _rename_apart(q.lhs, FreshVars("_R"))
    try:
        mu = unify_rational(capped, target)
    except NoUnifier:
        return False
    return mu.graph(capped).is_finite_under_filter(pi)


def estimated_dependency_graph(pairs: Sequence[Rule], rules: Sequence[Rule], pi: ArgumentFilter) -> dict[int, list[int]]:
    defined = {r.lhs.sym for r in rules}
    return {i: [j for j, q in enumerate(pairs) if has_arc(p, q, defined, pi)] for i, p in enumerate(pairs)}


def tarjan(n: int, edges: dict[int, list[int]]) -> list[list[int]]:
    """Strongly connected components, each sorted, listed by smallest member."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if root in index:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, k = work[-1]
            succ = edges.get(v, [])
            if k < len(succ):
                work[-1] = (v, k + 1)
                w = succ[k]
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, 0))
                elif w in on_stack:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    return sorted(comps)


@dataclass(frozen=True)
class DPProblem:
    pairs: tuple[Rule, ...]
    rules: tuple[Rule, ...]
    filter: ArgumentFilter
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.names:
            object.__setattr__(self, "names", tuple(f"D{i + 1}" for i in range(len(self.pairs))))

    def name_of(self, pair: Rule) -> str:
        return self.names[self.pairs.index(pair)]

    def subproblem(self, keep: Iterable[int]) -> "DPProblem":
        keep = sorted(keep)
        return DPProblem(tuple(self.pairs[i] for i in keep), self.rules, self.filter,
                         tuple(self.names[i] for i in keep))

    def canonical(self) -> str:
        parts = ["pairs:"] + [str(p) for p in self.pairs] + ["rules:"] + [str(r) for r in self.rules]
        used = {f for r in self.pairs + self.rules for f in r.symbols()}
        parts += ["filter:"] + [line for line in self.filter.lines() if any(line.startswith(f"pi({f})") for f in used)]
        return "\n".join(parts)


@dataclass(frozen=True)
class GraphResult:
    arcs: dict
    components: tuple[tuple[int, ...], ...]
    subproblems: tuple[DPProblem, ...]


def dependency_graph_processor(problem: DPProblem) -> GraphResult:
    """Split a problem into one sub-problem per cyclic SCC of the graph."""
    arcs = estimated_dependency_graph(problem.pairs, problem.rules, problem.filter)
    comps = []
    for comp in tarjan(len(problem.pairs), arcs):
        if len(comp) > 1 or comp[0] in arcs[comp[0]]:
            comps.append(tuple(comp))
    return GraphResult(arcs, tuple(comps), tuple(problem.subproblem(c) for c in comps))


def argument_filter_processor(problem: DPProblem) -> DPProblem:
    """(pi(D), pi(R), id): apply the filter and continue with the identity."""
    pi = problem.filter
    named: dict[Rule, str] = {}
    for p, n in zip(problem.pairs, problem.names):
        named.setdefault(p.filtered(pi), n + "'")
    pairs = tuple(named)
    rules = tuple(dict.fromkeys(r.filtered(pi) for r in problem.rules))
    symbols = {f for r in pairs + rules for f in r.symbols()}
    return DPProblem(pairs, rules, full_filter(symbols), tuple(named.values()))


def problem_symbols(problem: DPProblem) -> list[Symbol]:
    seen: dict[Symbol, None] = {}
    for r in problem.pairs + problem.rules:
        for f in r.symbols():
            seen.setdefault(f)
    return list(seen)


def filtered_str(rule: Rule, pi: ArgumentFilter) -> str:
    return f"{term_str(apply_filter(rule.lhs, pi))} -> {term_str(apply_filter(rule.rhs, pi))}"
