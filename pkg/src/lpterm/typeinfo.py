"""Monomorphic type inference over argument positions.

Every argument position (f, i) of a function or predicate symbol, plus the
result position (f, n+1) of each function symbol, is a node.  Two nodes are
joined when one clause puts the same variable in both, or when a term
rooted in f sits at position i of its parent.  Types are the resulting
equivalence classes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .parser import Program
from .terms import App, Symbol, Term, Var, sym_key

Key = tuple[Symbol, int]


class UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def add(self, x) -> None:
        self.parent.setdefault(x, x)

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[ry] = rx


def _key_order(k: Key) -> tuple:
    return (sym_key(k[0]), k[1])


@dataclass(frozen=True)
class TypeInfo:
    """Type of every position, with derived Reflexive and Unbounded sets."""

    type_of: dict
    functions: tuple[Symbol, ...]
    unbounded_sets: dict

    def tau(self, f: Symbol) -> tuple[str, ...]:
        n = f.arity + 1 if f.kind == "function" else f.arity
        return tuple(self.type_of[(f, i)] for i in range(1, n + 1))

    def result(self, f: Symbol) -> str:
        return self.type_of[(f, f.arity + 1)]

    def reflexive(self, f: Symbol) -> frozenset[int]:
        if f not in self.unbounded_sets:
            return frozenset()
        res = self.result(f)
        return frozenset(i for i in range(1, f.arity + 1) if self.type_of[(f, i)] == res)

    def unbounded(self, f: Symbol) -> frozenset[int]:
        return self.unbounded_sets.get(f, frozenset())

    def constructors(self, t: str) -> list[Symbol]:
        return [g for g in self.functions if self.result(g) == t]

    def classes(self) -> list[list[Key]]:
        groups: dict[str, list[Key]] = {}
        for k, t in self.type_of.items():
            groups.setdefault(t, []).append(k)
        return [sorted(v, key=_key_order) for _, v in sorted(groups.items(), key=lambda kv: int(kv[0][1:]))]


def infer_types(program: Program) -> TypeInfo:
    uf = UnionFind()
    for f in program.functions:
        for i in range(1, f.arity + 2):
            uf.add((f, i))
    for p in program.predicates:
        for i in range(1, p.arity + 1):
            uf.add((p, i))

    def visit(t: Term, key: Key, occ: dict) -> None:
        if isinstance(t, Var):
            occ.setdefault(t, []).append(key)
            return
        uf.union((t.sym, t.sym.arity + 1), key)
        for j, a in enumerate(t.args, 1):
            visit(a, (t.sym, j), occ)

    for c in program.clauses:
        occ: dict[Var, list[Key]] = {}
        for atom in (c.head,) + c.body:
            for i, a in enumerate(atom.args, 1):
                visit(a, (atom.sym, i), occ)
        for keys in occ.values():
            for k in keys[1:]:
                uf.union(keys[0], k)

    keys = sorted(uf.parent, key=_key_order)
    names: dict = {}
    type_of: dict[Key, str] = {}
    for k in keys:
        r = uf.find(k)
        if r not in names:
            names[r] = f"t{len(names)}"
        type_of[k] = names[r]

    functions = tuple(sorted(program.functions, key=sym_key))
    probe = TypeInfo(type_of, functions, {f: frozenset() for f in functions})
    unb = {f: set(probe.reflexive(f)) for f in functions}
    changed = True
    while changed:
        changed = False
        for f in functions:
            for i in range(1, f.arity + 1):
                if i in unb[f]:
                    continue
                if any(unb[g] for g in probe.constructors(type_of[(f, i)])):
                    unb[f].add(i)
                    changed = True
    return TypeInfo(type_of, functions, {f: frozenset(v) for f, v in unb.items()})
