"""Logic program to TRS transformations and the filters that go with them."""

from __future__ import annotations

from collections.abc import Iterable

from .parser import Moding, Program, check_well_moded
from .terms import App, ArgumentFilter, Rule, Symbol, Term, Trs, Var, vars_of


def in_symbol(p: Symbol, arity: int | None = None) -> Symbol:
    return Symbol(p.name, p.arity if arity is None else arity, "in")


def out_symbol(p: Symbol, arity: int | None = None) -> Symbol:
    return Symbol(p.name, p.arity if arity is None else arity, "out")


def _u(k: int, args: list[Term]) -> Symbol:
    return Symbol(f"u{k}", len(args) + 1, "u")


def _extend(acc: list[Var], terms: Iterable[Term]) -> list[Var]:
    return list(dict.fromkeys(acc + vars_of(terms)))


def transform_new(program: Program) -> Trs:
    """Transformation keeping all arguments on both in- and out-symbols.

    u-symbols are numbered u1, u2, ... over the body atoms of the whole
    program, in clause order.
    """
    rules: list[Rule] = []
    k = 0
    for c in program.clauses:
        p = c.head.sym
        s = list(c.head.args)
        if not c.body:
            rules.append(Rule(App(in_symbol(p), s), App(out_symbol(p), s), p))
            continue
        acc = vars_of(s)
        lhs: Term = App(in_symbol(p), s)
        for b in c.body:
            k += 1
            u = App(_u(k, acc), [App(in_symbol(b.sym), b.args)] + acc)
            rules.append(Rule(lhs, u, p))
            lhs = App(u.sym, [App(out_symbol(b.sym), b.args)] + acc)
            acc = _extend(acc, b.args)
        rules.append(Rule(lhs, App(out_symbol(p), s), p))
    return Trs(tuple(rules))


def transform_classical(program: Program, moding: Moding) -> Trs:
    """Classical transformation for well-moded programs.

    Raises NotWellModed when the moding is violated.
    """
    check_well_moded(program, moding)

    def ins(a: App) -> list[Term]:
        return [a.args[i - 1] for i in moding.inputs(a.sym)]

    def outs(a: App) -> list[Term]:
        return [a.args[i - 1] for i in moding.outputs(a.sym)]

    def pin(a: App) -> App:
        return App(in_symbol(a.sym, len(moding.inputs(a.sym))), ins(a))

    def pout(a: App) -> App:
        return App(out_symbol(a.sym, len(moding.outputs(a.sym))), outs(a))

    rules: list[Rule] = []
    k = 0
    for c in program.clauses:
        p = c.head.sym
        if not c.body:
            rules.append(Rule(pin(c.head), pout(c.head), p))
            continue
        acc = vars_of(ins(c.head))
        lhs: Term = pin(c.head)
        for b in c.body:
            k += 1
            u = App(_u(k, acc), [pin(b)] + acc)
            rules.append(Rule(lhs, u, p))
            lhs = App(u.sym, [pout(b)] + acc)
            acc = _extend(acc, outs(b))
        rules.append(Rule(lhs, pout(c.head), p))
    return Trs(tuple(rules))


def induced_filter(trs: Trs, moding: Moding) -> ArgumentFilter:
    """Filter that turns the new transformation into the classical one."""
    entries: dict[Symbol, tuple[int, ...]] = {}
    for f in trs.signature():
        pred = Symbol(f.name, f.arity, "predicate")
        if f.kind == "in":
            entries[f] = moding.inputs(pred)
        elif f.kind == "out":
            entries[f] = moding.outputs(pred)
        elif f.kind == "tuple" and f.base.kind == "in":
            entries[f] = moding.inputs(pred)
        else:
            entries[f] = tuple(range(1, f.arity + 1))
    return ArgumentFilter(entries)


def extend_initial_filter(trs: Trs, pi: ArgumentFilter, tuples: Iterable[Symbol] = ()) -> ArgumentFilter:
    """Extend a filter on predicates and function symbols to the TRS signature.

    p_in and its tuple symbol inherit pi(p); every other new symbol keeps
    all its arguments.
    """
    entries: dict[Symbol, tuple[int, ...]] = {}
    for f in list(trs.signature()) + list(tuples):
        base = f.base if f.kind == "tuple" else f
        if base.kind == "in":
            entries[f] = pi[Symbol(base.name, base.arity, "predicate")]
        elif base.kind == "function" and base in pi:
            entries[f] = pi[base]
        else:
            entries[f] = tuple(range(1, f.arity + 1))
    return ArgumentFilter(entries)
