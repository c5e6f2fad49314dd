"""Argument filter refinement.

``refine_basic`` shrinks a filter until every rule satisfies the variable
condition V(pi(r)) <= V(pi(l)).  ``refine_modesplit`` does the same but,
when the heuristic asks to drop an argument of some p_in, it introduces a
labelled copy p_in^I of the predicate instead, so that different call
patterns of one predicate keep separate filters.
"""

from __future__ import annotations

from collections.abc import Sequence
from typing import Optional

from .dp import dependency_pairs
from .errors import NoChoice
from .terms import (
    App, ArgumentFilter, Position, Rule, Symbol, Term, Trs, kept_var_positions, subterm,
)
from .typeinfo import TypeInfo

HEURISTICS = ("im", "om", "om2", "tb", "tb2")

# im and om may pick (u, 1) on a dependency pair, so they refine pairs too
# and keep separate filters for tuple symbols.
SCANS_PAIRS = ("im", "om")


def heuristic_choose(h: str, t: Term, pos: Position, types: Optional[TypeInfo] = None) -> tuple[Symbol, int]:
    """Pick (f, i) with root(t|q) = f and q.i a prefix of ``pos``."""
    if not pos:
        raise NoChoice("heuristics need a non-root position")
    if h == "im":
        return subterm(t, pos[:-1]).sym, pos[-1]
    if h == "om":
        return t.sym, pos[0]
    if h == "om2":
        while pos[0] == 1 and t.sym.is_u and len(pos) > 1:
            t, pos = t.args[0], pos[1:]
        return t.sym, pos[0]
    if h in ("tb", "tb2"):
        if types is None:
            raise ValueError("type-based heuristics need type information")
        for k in range(len(pos) - 1, -1, -1):
            f, i = subterm(t, pos[:k]).sym, pos[k]
            skip = types.reflexive(f) if h == "tb" else types.unbounded(f)
            if k > 0 and f.kind == "function" and i in skip:
                continue
            return f, i
    raise ValueError(f"unknown heuristic {h!r}")


def first_violation(rule: Rule, pi: ArgumentFilter) -> Optional[Position]:
    """Leftmost position of a kept rhs variable that the filtered lhs lacks."""
    lhs_vars = {v for _, v in kept_var_positions(rule.lhs, pi)}
    for pos, v in kept_var_positions(rule.rhs, pi):
        if v not in lhs_vars:
            return pos
    return None


def check_variable_condition(rules: Sequence[Rule], pi: ArgumentFilter) -> list[tuple[int, Position]]:
    out = []
    for n, r in enumerate(rules):
        lhs_vars = {v for _, v in kept_var_positions(r.lhs, pi)}
        out.extend((n, pos) for pos, v in kept_var_positions(r.rhs, pi) if v not in lhs_vars)
    return out


def _full(f: Symbol) -> tuple[int, ...]:
    return tuple(range(1, f.arity + 1))


def _tuple_defaults(pairs: Sequence[Rule], pi: dict, initial) -> None:
    for p in pairs:
        for t in (p.lhs, p.rhs):
            if t.sym not in pi:
                pi[t.sym] = initial(t.sym.base)


def _shrink(pi: dict, f: Symbol, i: int) -> None:
    if i not in pi[f]:
        raise NoChoice(f"heuristic chose {f}/{i}, which is already filtered")
    pi[f] = tuple(j for j in pi[f] if j != i)


def _mirror_tuples(rules: Sequence[Rule], pi: dict) -> None:
    for p in dependency_pairs(rules):
        for t in (p.lhs, p.rhs):
            pi[t.sym] = pi[t.sym.base]


def refine_basic(trs: Trs, pi0: ArgumentFilter, heuristic: str = "tb2",
                 types: Optional[TypeInfo] = None) -> ArgumentFilter:
    """Shrink ``pi0`` (total on the TRS signature) until R satisfies the
    variable condition; with im/om the dependency pairs are refined too."""
    rules = list(trs)
    pi = dict(pi0.items())
    for f in trs.signature():
        pi.setdefault(f, _full(f))
    pairs = dependency_pairs(rules) if heuristic in SCANS_PAIRS else []
    initial = dict(pi)
    _tuple_defaults(pairs, pi, lambda f: initial[f])
    scan = rules + pairs
    while True:
        hit = None
        for r in scan:
            pos = first_violation(r, ArgumentFilter(pi))
            if pos is not None:
                hit = (r, pos)
                break
        if hit is None:
            break
        f, i = heuristic_choose(heuristic, hit[0].rhs, hit[1], types)
        _shrink(pi, f, i)
    if heuristic not in SCANS_PAIRS:
        _mirror_tuples(rules, pi)
    return ArgumentFilter(pi)


def _relabel_root(t: App, label) -> App:
    return App(t.sym.with_label(label), t.args)


def _pred(f: Symbol) -> Symbol:
    return Symbol(f.name, f.arity, "predicate")


def refine_modesplit(trs: Trs, pi: ArgumentFilter, heuristic: str = "tb2",
                     types: Optional[TypeInfo] = None) -> tuple[Trs, ArgumentFilter]:
    """Refinement with labelled predicate copies.

    ``pi`` is a filter on predicates and function symbols.  Returns the
    extended TRS R' and a filter on its signature (tuple symbols included)
    under which R' satisfies the variable condition.
    """
    blocks: dict[Symbol, list[Rule]] = {}
    for r in trs:
        blocks.setdefault(r.origin, []).append(r)
    rules: list[Rule] = list(trs)
    introduced: dict[Symbol, set] = {p: set() for p in blocks}

    def copies(p: Symbol, label: frozenset) -> list[Rule]:
        return [Rule(_relabel_root(r.lhs, label), _relabel_root(r.rhs, label), p) for r in blocks.get(p, [])]

    for p in blocks:
        keep = frozenset(pi[p])
        if len(keep) < p.arity:
            introduced[p].add(keep)
            rules.extend(copies(p, keep))

    def initial(f: Symbol) -> tuple[int, ...]:
        if f.kind == "function":
            return pi[f] if f in pi else _full(f)
        if f.kind == "in" and f.label is not None:
            return tuple(sorted(f.label))
        return _full(f)

    filt: dict[Symbol, tuple[int, ...]] = {}

    def register(rs: Sequence[Rule]) -> None:
        for r in rs:
            for f in r.symbols():
                if f not in filt:
                    filt[f] = initial(f)

    register(rules)
    scan_pairs = heuristic in SCANS_PAIRS
    while True:
        pairs = dependency_pairs(rules) if scan_pairs else []
        _tuple_defaults(pairs, filt, initial)
        view = ArgumentFilter(filt)
        hit = None
        for n, r in enumerate(rules):
            pos = first_violation(r, view)
            if pos is not None:
                hit = (n, r, pos, True)
                break
        if hit is None:
            for r in pairs:
                pos = first_violation(r, view)
                if pos is not None:
                    hit = (None, r, pos, False)
                    break
        if hit is None:
            break
        n, r, pos, in_rules = hit
        f, i = heuristic_choose(heuristic, r.rhs, pos, types)
        first = r.rhs.args[0] if isinstance(r.rhs, App) and r.rhs.args else None
        if in_rules and f.kind == "in" and isinstance(first, App) and first.sym == f and r.rhs.sym.kind == "u":
            if i not in filt[f]:
                raise NoChoice(f"heuristic chose {f}/{i}, which is already filtered")
            label = frozenset(f.label if f.label is not None else _full(f)) - {i}
            g = f.with_label(label)
            filt.setdefault(g, tuple(sorted(label)))
            rules[n] = Rule(r.lhs, App(r.rhs.sym, (App(g, first.args),) + r.rhs.args[1:]), r.origin)
            p = _pred(f)
            if label not in introduced.setdefault(p, set()):
                introduced[p].add(label)
                new = copies(p, label)
                rules.extend(new)
                register(new)
            u = r.rhs.sym
            followers = [k for k, q in enumerate(rules) if q.lhs.sym == u]
            if len(followers) != 1:
                raise NoChoice(f"expected one rule with root {u} on the left, found {len(followers)}")
            k = followers[0]
            q = rules[k]
            old_out = q.lhs.args[0]
            new_out = App(old_out.sym.with_label(label), old_out.args)
            rules[k] = Rule(App(u, (new_out,) + q.lhs.args[1:]), q.rhs, q.origin)
            filt.setdefault(new_out.sym, _full(new_out.sym))
        else:
            _shrink(filt, f, i)
    if not scan_pairs:
        _mirror_tuples(rules, filt)
    else:
        _tuple_defaults(dependency_pairs(rules), filt, initial)
    used = {f for r in rules for f in r.symbols()} | {f for p in dependency_pairs(rules) for t in (p.lhs, p.rhs) for f in [t.sym]}
    return Trs(tuple(rules)), ArgumentFilter({f: v for f, v in filt.items() if f in used})


def unlabel(trs: Trs) -> Trs:
    """Drop all labels and duplicate rules."""

    def strip(t: Term) -> Term:
        if not isinstance(t, App):
            return t
        return App(t.sym.with_label(None), [strip(a) for a in t.args])

    return Trs(tuple(dict.fromkeys(Rule(strip(r.lhs), strip(r.rhs), r.origin) for r in trs)))
