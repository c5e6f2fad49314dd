"""Executable semantics used to cross-check the prover.

``sld_derive`` runs a definite program on a query with the leftmost
selection rule, clause order and full backtracking, without occur check.
``rewrite_bounded`` explores constructor rewriting on finite terms.
``simulate_success`` turns a successful derivation into a rewrite sequence
of the transformed TRS, which ``check_rewrite_step`` validates one step at
a time.
"""

from __future__ import annotations

import random
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Optional

from .parser import Clause, Program, QuerySpec
from .terms import (
    App, Bindings, Rule, Symbol, Term, TermGraph, Var, positions, replace, subterm,
    substitute, term_vars, vars_of,
)
from .transform import in_symbol, out_symbol, transform_new

SUCCESS = "success"
FAILURE = "failure"
DEPTH_EXCEEDED = "depth-exceeded"


@dataclass(frozen=True)
class Resolution:
    """One resolution step of a derivation.

    ``node`` identifies the selected atom, ``children`` the body atoms that
    replace it; ``renaming`` maps clause variables to their fresh copies.
    """

    node: int
    atom: App
    clause: int
    renaming: dict
    children: tuple[int, ...]


@dataclass
class DerivationTrace:
    outcome: str
    query: tuple[App, ...]
    steps: list[Resolution] = field(default_factory=list)
    bindings: Bindings = field(default_factory=Bindings)
    solutions: int = 0
    nodes: int = 0
    truncated: bool = False
    # query bindings on the first branch that hit the depth bound
    cut_answer: dict = field(default_factory=dict)

    @property
    def length(self) -> int:
        return len(self.steps)

    def answer(self) -> dict[Var, TermGraph]:
        """Bindings of the query variables, as possibly cyclic graphs.

        For a depth-exceeded trace these are the bindings on the first
        branch that reached the bound.
        """
        if self.outcome == DEPTH_EXCEEDED:
            return dict(self.cut_answer)
        return {v: TermGraph.build(v, self.bindings) for v in vars_of(self.query)}

    def queries(self) -> list[list[str]]:
        """Goal lists along the recorded branch, printed under final bindings."""
        atom_of = {s.node: s.atom for s in self.steps}
        atom_of.update(enumerate(self.query))

        def show(nodes: list[int]) -> list[str]:
            return [str(TermGraph.build(atom_of[k], self.bindings)) for k in nodes]

        current = list(range(len(self.query)))
        out = [show(current)]
        for step in self.steps:
            current = list(step.children) + current[1:]
            out.append(show(current))
        return out


class _Goals:
    """Immutable goal list: atom with node id, followed by the rest."""

    __slots__ = ("atom", "node", "rest")

    def __init__(self, atom: App, node: int, rest: Optional["_Goals"]):
        self.atom, self.node, self.rest = atom, node, rest


def sld_derive(program: Program, query: Sequence[App], depth_bound: int,
               exhaust: bool = False, max_nodes: Optional[int] = None) -> DerivationTrace:
    """Depth-first SLD resolution up to ``depth_bound`` steps per branch.

    Without ``exhaust`` the first success is returned together with its
    branch.  With ``exhaust`` the whole tree (up to the bound) is visited:
    the outcome is depth-exceeded if any branch hit the bound, otherwise
    success if some branch succeeded.  ``max_nodes`` caps the number of
    resolution steps tried; hitting it sets ``truncated``.
    """
    if depth_bound < 1:
        raise ValueError("depth bound must be at least 1")
    clauses = program.clauses
    by_pred: dict[Symbol, list[int]] = {}
    for n, c in enumerate(clauses):
        by_pred.setdefault(c.head.sym, []).append(n)
    b = Bindings()
    trace = DerivationTrace(FAILURE, tuple(query), bindings=b)
    goals: Optional[_Goals] = None
    for k in range(len(query) - 1, -1, -1):
        goals = _Goals(query[k], k, goals)
    counter = [len(query)]
    fresh = [0]
    path: list[Resolution] = []
    exceeded = False
    best: Optional[list[Resolution]] = None
    # choice point: (goals, next candidate index, trail mark, path length, node counter)
    stack: list[tuple] = []
    start = 0

    def rename(c: Clause) -> tuple[App, list[App], dict]:
        ren: dict[Var, Term] = {}
        for v in c.variables():
            fresh[0] += 1
            ren[v] = Var(f"_G{fresh[0]}")
        return substitute(c.head, ren), [substitute(a, ren) for a in c.body], ren

    while True:
        descend = False
        if goals is None:
            trace.solutions += 1
            if best is None:
                best = list(path)
            if not exhaust:
                trace.outcome = SUCCESS
                trace.steps = best
                return trace
        elif len(path) >= depth_bound:
            if not exceeded:
                trace.cut_answer = {v: TermGraph.build(v, b) for v in vars_of(query)}
            exceeded = True
        elif max_nodes is not None and trace.nodes >= max_nodes:
            trace.truncated = True
            break
        else:
            cands = by_pred.get(goals.atom.sym, [])
            for j in range(start, len(cands)):
                n = cands[j]
                mark = b.mark()
                head, body, ren = rename(clauses[n])
                trace.nodes += 1
                if b.unify(goals.atom, head):
                    stack.append((goals, j + 1, mark, len(path), counter[0]))
                    ids = tuple(range(counter[0], counter[0] + len(body)))
                    counter[0] += len(body)
                    path.append(Resolution(goals.node, goals.atom, n, ren, ids))
                    rest = goals.rest
                    for a, k in zip(reversed(body), reversed(ids)):
                        rest = _Goals(a, k, rest)
                    goals = rest
                    start = 0
                    descend = True
                    break
                b.undo(mark)
        if descend:
            continue
        if not stack:
            break
        goals, start, mark, plen, counter[0] = stack.pop()
        b.undo(mark)
        del path[plen:]
    if exceeded:
        trace.outcome = DEPTH_EXCEEDED
    elif trace.solutions:
        trace.outcome = SUCCESS
    else:
        trace.outcome = FAILURE
    if best is not None and not exhaust:
        trace.steps = best
    return trace


# -- matching and rewriting -------------------------------------------------------

def match(pattern: Term, t: Term, sub: Optional[dict] = None) -> Optional[dict]:
    """Syntactic matching: a substitution mu with pattern mu == t, or None."""
    sub = dict(sub or {})
    work = [(pattern, t)]
    while work:
        p, s = work.pop()
        if isinstance(p, Var):
            if p in sub:
                if sub[p] != s:
                    return None
            else:
                sub[p] = s
            continue
        if not isinstance(s, App) or s.sym != p.sym:
            return None
        work.extend(zip(p.args, s.args))
    return sub


def _defined(rules: Iterable[Rule]) -> set[Symbol]:
    return {r.lhs.sym for r in rules}


def is_constructor_term(t: Term, defined: set[Symbol]) -> bool:
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, App):
            if s.sym in defined:
                return False
            stack.extend(s.args)
    return True


def check_rewrite_step(rules: Sequence[Rule], s: Term, t: Term) -> bool:
    """Does s rewrite to t in one constructor rewrite step?

    The left- and right-hand side of a rule are matched jointly against the
    redex and the contractum, so that right-hand-side-only variables are
    instantiated consistently, and every variable must be mapped to a
    constructor term.
    """
    defined = _defined(rules)
    hole = Var("_HOLE")
    for pos in positions(s):
        redex = subterm(s, pos)
        if not isinstance(redex, App) or redex.sym not in defined:
            continue
        try:
            contractum = subterm(t, pos)
        except (IndexError, AttributeError):
            continue
        if replace(s, pos, hole) != replace(t, pos, hole):
            continue
        for r in rules:
            mu = match(r.lhs, redex)
            if mu is None:
                continue
            mu = match(r.rhs, contractum, mu)
            if mu is None:
                continue
            if all(is_constructor_term(v, defined) for v in mu.values()):
                return True
    return False


def _constructor_subterms(t: Term, defined: set[Symbol]) -> list[Term]:
    out: dict[Term, None] = {}
    for pos in positions(t):
        s = subterm(t, pos)
        if is_constructor_term(s, defined):
            out.setdefault(s)
    return list(out)


def rewrite_successors(rules: Sequence[Rule], t: Term, defined: Optional[set] = None,
                       max_choices: int = 4) -> list[Term]:
    """One-step constructor rewrites of ``t``.

    Variables occurring only on a right-hand side are instantiated by
    constructor subterms of ``t`` (at most ``max_choices`` of them) or by a
    fresh variable.
    """
    defined = _defined(rules) if defined is None else defined
    out: dict[Term, None] = {}
    pool = None
    for pos in positions(t):
        redex = subterm(t, pos)
        if not isinstance(redex, App) or redex.sym not in defined:
            continue
        for r in rules:
            mu = match(r.lhs, redex)
            if mu is None or not all(is_constructor_term(v, defined) for v in mu.values()):
                continue
            extra = [v for v in term_vars(r.rhs) if v not in mu]
            choices = [dict(mu)]
            if extra:
                if pool is None:
                    pool = _constructor_subterms(t, defined)[:max_choices]
                for k, v in enumerate(extra):
                    fresh = Var(f"_E{len(vars_of([t])) + k}")
                    choices = [{**c, v: s} for c in choices for s in pool + [fresh]]
            for c in choices:
                out.setdefault(replace(t, pos, substitute(r.rhs, c)))
    return list(out)


def rewrite_bounded(rules: Sequence[Rule], t: Term, step_bound: int, node_limit: int = 100_000) -> int:
    """Length of the longest constructor rewrite sequence from ``t`` found
    within ``step_bound`` steps, exploring at most ``node_limit`` terms."""
    rules = list(rules)
    defined = _defined(rules)
    memo: dict[tuple[Term, int], int] = {}
    budget = [node_limit]

    def longest(s: Term, k: int) -> int:
        if k == 0:
            return 0
        key = (s, k)
        if key in memo:
            return memo[key]
        best = 0
        if budget[0] > 0:
            budget[0] -= 1
            for nxt in rewrite_successors(rules, s, defined):
                best = max(best, 1 + longest(nxt, k - 1))
                if best == k or budget[0] <= 0:
                    break
        memo[key] = best
        return best

    return longest(t, step_bound)


# -- simulation of successful derivations ------------------------------------------

def clause_rules(program: Program, trs: Optional[Sequence[Rule]] = None) -> list[list[Rule]]:
    """Rules of the transformed TRS grouped by the clause they come from."""
    rules = list(trs if trs is not None else transform_new(program))
    out, k = [], 0
    for c in program.clauses:
        n = len(c.body) + 1
        out.append(rules[k:k + n])
        k += n
    if k != len(rules):
        raise ValueError("TRS does not match the program clause by clause")
    return out


class CyclicAnswer(Exception):
    pass


def simulate_success(program: Program, trace: DerivationTrace,
                     trs: Optional[Sequence[Rule]] = None) -> list[Term]:
    """Rewrite sequence p_in(t)sigma ->* p_out(t)sigma for a one-atom query.

    Each resolution step contributes the rules of its clause, instantiated
    with the final bindings.  Raises CyclicAnswer when a binding needed
    for this is a rational, non-finite term.
    """
    if trace.outcome != SUCCESS or len(trace.query) != 1:
        raise ValueError("needs a successful derivation of a single atom")
    groups = clause_rules(program, trs)
    by_node = {s.node: s for s in trace.steps}
    b = trace.bindings

    def resolve(t: Term) -> Term:
        g = TermGraph.build(t, b)
        if g.is_cyclic():
            raise CyclicAnswer(str(g))
        return g.to_term()

    def seq(node: int) -> list[Term]:
        step = by_node[node]
        theta = {v: resolve(w) for v, w in step.renaming.items()}
        rules = [(substitute(r.lhs, theta), substitute(r.rhs, theta)) for r in groups[step.clause]]
        out = [rules[0][0], rules[0][1]]
        for j, child in enumerate(step.children):
            cur = out[-1]
            sub = seq(child)
            for s in sub[1:]:
                out.append(App(cur.sym, (s,) + tuple(cur.args[1:])))
            out.append(rules[j + 1][1])
        return out

    return seq(0)


def goal_terms(atom: App, bindings: Bindings) -> tuple[Term, Term]:
    """(p_in(t)sigma, p_out(t)sigma) for a query atom under final bindings."""
    g = TermGraph.build(atom, bindings)
    if g.is_cyclic():
        raise CyclicAnswer(str(g))
    a = g.to_term()
    return App(in_symbol(a.sym), a.args), App(out_symbol(a.sym), a.args)


# -- query sampling ------------------------------------------------------------------

def random_term(rng: random.Random, functions: Sequence[Symbol], depth: int, pi=None,
                ground: bool = True, var_rate: float = 0.3, names: Optional[list] = None) -> Term:
    """Random term of depth <= ``depth``.

    With ``ground`` the parts kept by ``pi`` are ground; filtered-away
    arguments may hold variables.
    """
    names = names if names is not None else [0]
    consts = [f for f in functions if f.arity == 0]
    if not ground and rng.random() < var_rate:
        names[0] += 1
        return Var(f"V{names[0]}")
    pool = consts if depth <= 0 else list(functions)
    f = rng.choice(pool)
    keep = pi[f] if pi is not None else tuple(range(1, f.arity + 1))
    args = [random_term(rng, functions, depth - 1, pi, ground and i in keep, var_rate, names)
            for i in range(1, f.arity + 1)]
    return App(f, args)


def sample_queries(program: Program, spec: Optional[QuerySpec], count: int, seed: int = 0,
                   depth: int = 4) -> list[App]:
    """Queries from the class: kept positions of the entry predicate are
    ground after filtering; the other positions are arbitrary."""
    rng = random.Random(seed)
    pi = spec.initial_filter(program) if spec is not None else None
    entry = spec.entry if spec is not None and spec.entry is not None else program.clauses[0].head.sym
    functions = sorted(program.functions, key=lambda f: (f.name, f.arity))
    out = []
    for _ in range(count):
        names = [0]
        keep = pi[entry] if pi is not None else tuple(range(1, entry.arity + 1))
        args = [random_term(rng, functions, rng.randint(0, depth), pi, i in keep, names=names)
                for i in range(1, entry.arity + 1)]
        out.append(App(entry, args))
    return out
