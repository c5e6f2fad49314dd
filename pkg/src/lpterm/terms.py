"""Terms, symbols, substitutions, unification and argument filters.

Terms are immutable: a term is either a ``Var`` or an ``App`` of a
``Symbol`` to a tuple of argument terms.  Atoms are ``App`` nodes whose
symbol has kind ``"predicate"``.  Positions are tuples of 1-based argument
indices.

Two unification routines live here.  ``unify_finite`` is Robinson
unification with occur check and returns an idempotent substitution.
``unify_rational`` omits the occur check; its result may bind variables
cyclically and is read back through ``TermGraph``.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import NoUnifier, UnmappedSymbol

KINDS = ("function", "predicate", "in", "out", "u", "tuple")

Position = tuple[int, ...]
Label = Optional[frozenset]


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int
    kind: str = "function"
    label: Label = None
    base: Optional["Symbol"] = None
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown symbol kind {self.kind!r}")
        h = hash((self.name, self.arity, self.kind, self.label, self.base))
        object.__setattr__(self, "_hash", h)

    def __hash__(self) -> int:
        return self._hash

    def with_label(self, label: Label) -> "Symbol":
        return Symbol(self.name, self.arity, self.kind, label, self.base)

    def with_arity(self, arity: int) -> "Symbol":
        base = self.base.with_arity(arity) if self.base is not None else None
        return Symbol(self.name, arity, self.kind, self.label, base)

    def tuple_symbol(self) -> "Symbol":
        return Symbol(self.name, self.arity, "tuple", self.label, self)

    @property
    def is_u(self) -> bool:
        return self.kind == "u" or (self.kind == "tuple" and self.base.kind == "u")

    def __str__(self) -> str:
        if self.kind == "tuple":
            s = str(self.base)
            return s[0].upper() + s[1:] if s[0].isalpha() else s + "#"
        core = _quote(self.name)
        if self.kind == "in":
            core += "_in"
        elif self.kind == "out":
            core += "_out"
        if self.label is not None:
            core += "^{" + ",".join(str(i) for i in sorted(self.label)) + "}"
        return core


def _quote(name: str) -> str:
    if name == "[]" or name.isdigit():
        return name
    if name and (name[0].isalpha() or name[0] == "_") and all(c.isalnum() or c == "_" for c in name):
        return name
    return "'" + name.replace("'", "\\'") + "'"


class Var:
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Var) and other.name == self.name

    def __hash__(self) -> int:
        return hash(("$var", self.name))

    def __repr__(self) -> str:
        return f"Var({self.name!r})"

    def __str__(self) -> str:
        return self.name


class App:
    __slots__ = ("sym", "args", "_h")

    def __init__(self, sym: Symbol, args: Iterable["Term"] = ()):
        args = tuple(args)
        if len(args) != sym.arity:
            raise ValueError(f"{sym} expects {sym.arity} arguments, got {len(args)}")
        self.sym = sym
        self.args = args
        self._h = None

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, App) or hash(self) != hash(other):
            return False
        return self.sym == other.sym and self.args == other.args

    def __hash__(self) -> int:
        if self._h is None:
            self._h = hash((self.sym, self.args))
        return self._h

    def __repr__(self) -> str:
        return f"App({self.sym!r}, {self.args!r})"

    def __str__(self) -> str:
        return term_str(self)


Term = Union[Var, App]
Substitution = dict


def term_str(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return str(t.sym)
    return f"{t.sym}(" + ",".join(term_str(a) for a in t.args) + ")"


def term_vars(t: Term) -> list[Var]:
    """Variables of ``t`` in first-occurrence (left-to-right) order."""
    seen: dict[Var, None] = {}
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Var):
            seen.setdefault(s)
        else:
            stack.extend(reversed(s.args))
    return list(seen)


def vars_of(terms: Iterable[Term]) -> list[Var]:
    seen: dict[Var, None] = {}
    for t in terms:
        for v in term_vars(t):
            seen.setdefault(v)
    return list(seen)


def positions(t: Term) -> Iterator[Position]:
    """All positions of ``t`` in pre-order."""
    stack: list[tuple[Position, Term]] = [((), t)]
    while stack:
        pos, s = stack.pop()
        yield pos
        if isinstance(s, App):
            for i in range(len(s.args), 0, -1):
                stack.append((pos + (i,), s.args[i - 1]))


def var_positions(t: Term) -> list[tuple[Position, Var]]:
    return [(p, subterm(t, p)) for p in positions(t) if isinstance(subterm(t, p), Var)]


def subterm(t: Term, pos: Position) -> Term:
    for i in pos:
        t = t.args[i - 1]
    return t


def replace(t: Term, pos: Position, s: Term) -> Term:
    if not pos:
        return s
    i = pos[0]
    args = list(t.args)
    args[i - 1] = replace(args[i - 1], pos[1:], s)
    return App(t.sym, args)


def substitute(t: Term, sigma: Mapping[Var, Term]) -> Term:
    """Apply ``sigma`` once; idempotent substitutions need nothing more."""
    if isinstance(t, Var):
        return sigma.get(t, t)
    if not t.args:
        return t
    return App(t.sym, [substitute(a, sigma) for a in t.args])


def is_ground(t: Term) -> bool:
    return not term_vars(t)


def symbols_of(t: Term) -> list[Symbol]:
    seen: dict[Symbol, None] = {}
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, App):
            seen.setdefault(s.sym)
            stack.extend(reversed(s.args))
    return list(seen)


def depth(t: Term) -> int:
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + max(depth(a) for a in t.args)


class FreshVars:
    """Monotone counter for fresh variable names, scoped to one operation."""

    def __init__(self, prefix: str = "_V"):
        self.prefix = prefix
        self.n = 0

    def __call__(self) -> Var:
        self.n += 1
        return Var(f"{self.prefix}{self.n}")

    def rename(self, terms: Iterable[Term]) -> tuple[list[Term], dict[Var, Term]]:
        terms = list(terms)
        mapping: dict[Var, Term] = {v: self() for v in vars_of(terms)}
        return [substitute(t, mapping) for t in terms], mapping


# -- finite unification ------------------------------------------------------

def _walk(t: Term, b: Mapping[Var, Term]) -> Term:
    while isinstance(t, Var) and t in b:
        t = b[t]
    return t


def _occurs(v: Var, t: Term, b: Mapping[Var, Term]) -> bool:
    stack = [t]
    while stack:
        s = _walk(stack.pop(), b)
        if s == v:
            return True
        if isinstance(s, App):
            stack.extend(s.args)
    return False


def _resolve(t: Term, b: Mapping[Var, Term]) -> Term:
    t = _walk(t, b)
    if isinstance(t, Var) or not t.args:
        return t
    return App(t.sym, [_resolve(a, b) for a in t.args])


def unify_finite(s: Term, t: Term) -> Substitution:
    """Most general idempotent unifier of ``s`` and ``t`` over finite terms."""
    b: dict[Var, Term] = {}
    work = [(s, t)]
    while work:
        x, y = work.pop()
        x, y = _walk(x, b), _walk(y, b)
        if x == y:
            continue
        if isinstance(x, Var):
            if _occurs(x, y, b):
                raise NoUnifier(f"occur check: {x} in {term_str(y)}")
            b[x] = y
        elif isinstance(y, Var):
            if _occurs(y, x, b):
                raise NoUnifier(f"occur check: {y} in {term_str(x)}")
            b[y] = x
        elif x.sym != y.sym:
            raise NoUnifier(f"clash {x.sym} / {y.sym}")
        else:
            work.extend(zip(x.args, y.args))
    return {v: _resolve(v, b) for v in b}


# -- rational unification ----------------------------------------------------

class Bindings:
    """Variable store for unification without occur check.

    Bound variables point at terms that may mention bound variables again,
    so the solved form can be cyclic.  Every binding is recorded on a trail
    so that callers can backtrack with ``undo``.
    """

    def __init__(self, initial: Optional[Mapping[Var, Term]] = None):
        self.map: dict[Var, Term] = dict(initial or {})
        self.trail: list[Var] = []

    def deref(self, t: Term) -> Term:
        m = self.map
        while isinstance(t, Var):
            nxt = m.get(t)
            if nxt is None:
                return t
            t = nxt
        return t

    def bind(self, v: Var, t: Term) -> None:
        self.map[v] = t
        self.trail.append(v)

    def mark(self) -> int:
        return len(self.trail)

    def undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            del self.map[self.trail.pop()]

    def unify(self, s: Term, t: Term) -> bool:
        # Compound pairs already under comparison are assumed equal; this
        # coinductive step is what makes cyclic bindings terminate.
        assumed: set[tuple[int, int]] = set()
        work = [(s, t)]
        while work:
            x, y = work.pop()
            x, y = self.deref(x), self.deref(y)
            if x is y:
                continue
            if isinstance(x, Var):
                if x != y:
                    self.bind(x, y)
                continue
            if isinstance(y, Var):
                self.bind(y, x)
                continue
            if x.sym != y.sym:
                return False
            key = (id(x), id(y))
            if key in assumed:
                continue
            assumed.add(key)
            work.extend(zip(reversed(x.args), reversed(y.args)))
        return True

    def graph(self, t: Term) -> "TermGraph":
        return TermGraph.build(t, self)


@dataclass
class RationalUnifier:
    """Result of ``unify_rational``: a possibly cyclic solved form."""

    bindings: Bindings

    def graph(self, t: Term) -> "TermGraph":
        return TermGraph.build(t, self.bindings)

    def __getitem__(self, v: Var) -> "TermGraph":
        return self.graph(v)

    def domain(self) -> list[Var]:
        return list(self.bindings.map)


def unify_rational(s: Term, t: Term) -> RationalUnifier:
    """Unify without occur check; cyclic solutions are allowed."""
    b = Bindings()
    if not b.unify(s, t):
        raise NoUnifier(f"{term_str(s)} and {term_str(t)} are not unifiable")
    return RationalUnifier(b)


@dataclass(frozen=True)
class TermGraph:
    """Finite rooted graph denoting a rational term.

    ``labels[k]`` is a Symbol for function nodes or a Var for free
    variables; ``children[k]`` lists node indices.  Node 0 is the root.
    """

    labels: tuple
    children: tuple

    @staticmethod
    def build(t: Term, b: Optional[Bindings] = None) -> "TermGraph":
        b = b or Bindings()
        labels: list = []
        children: list = []
        index: dict[int, int] = {}
        var_index: dict[Var, int] = {}

        def node_of(s: Term) -> tuple[int, bool]:
            s = b.deref(s)
            if isinstance(s, Var):
                if s not in var_index:
                    var_index[s] = len(labels)
                    labels.append(s)
                    children.append(())
                return var_index[s], False
            if id(s) in index:
                return index[id(s)], False
            index[id(s)] = len(labels)
            labels.append(s.sym)
            children.append(None)
            return index[id(s)], True

        keep: list[Term] = []
        root, new = node_of(t)
        stack = [(root, b.deref(t))] if new else []
        while stack:
            k, s = stack.pop()
            keep.append(s)
            kids = []
            for a in s.args:
                j, fresh = node_of(a)
                kids.append(j)
                if fresh:
                    stack.append((j, b.deref(a)))
            children[k] = tuple(kids)
        return TermGraph(tuple(labels), tuple(children))

    def is_cyclic(self) -> bool:
        return not self._acyclic(lambda sym, i: True)

    def is_finite_under_filter(self, pi: "ArgumentFilter") -> bool:
        return self._acyclic(lambda sym, i: i in pi[sym])

    def _acyclic(self, keep) -> bool:
        state = [0] * len(self.labels)  # 0 new, 1 on stack, 2 done
        stack = [(0, 0)]
        state[0] = 1
        while stack:
            k, i = stack.pop()
            kids = self.children[k]
            if i < len(kids):
                stack.append((k, i + 1))
                if isinstance(self.labels[k], Symbol) and keep(self.labels[k], i + 1):
                    j = kids[i]
                    if state[j] == 1:
                        return False
                    if state[j] == 0:
                        state[j] = 1
                        stack.append((j, 0))
            else:
                state[k] = 2
        return True

    def to_term(self) -> Term:
        if self.is_cyclic():
            raise ValueError("cyclic term graph has no finite term")
        memo: dict[int, Term] = {}
        order: list[int] = []
        stack = [(0, False)]
        while stack:
            k, done = stack.pop()
            if k in memo:
                continue
            if done:
                lab = self.labels[k]
                memo[k] = lab if isinstance(lab, Var) else App(lab, [memo[j] for j in self.children[k]])
                order.append(k)
                continue
            stack.append((k, True))
            for j in self.children[k]:
                if j not in memo:
                    stack.append((j, False))
        return memo[0]

    def __str__(self) -> str:
        # A node that closes a cycle is tagged @k= and referenced as @k.
        targets = self._cycle_targets()
        out: list[str] = []
        open_nodes: set[int] = set()

        def emit(k: int) -> None:
            lab = self.labels[k]
            if isinstance(lab, Var):
                out.append(lab.name)
                return
            if k in open_nodes:
                out.append(f"@{k}")
                return
            if k in targets:
                out.append(f"@{k}=")
            out.append(str(lab))
            if self.children[k]:
                open_nodes.add(k)
                out.append("(")
                for n, j in enumerate(self.children[k]):
                    if n:
                        out.append(",")
                    emit(j)
                out.append(")")
                open_nodes.discard(k)

        emit(0)
        return "".join(out)

    def _cycle_targets(self) -> set[int]:
        targets: set[int] = set()
        state = [0] * len(self.labels)
        stack = [(0, 0)]
        state[0] = 1
        while stack:
            k, i = stack.pop()
            kids = self.children[k]
            if i < len(kids):
                stack.append((k, i + 1))
                j = kids[i]
                if state[j] == 1:
                    targets.add(j)
                elif state[j] == 0:
                    state[j] = 1
                    stack.append((j, 0))
            else:
                state[k] = 2
        return targets


def is_finite_under_filter(g: TermGraph, pi: "ArgumentFilter") -> bool:
    return g.is_finite_under_filter(pi)


# -- argument filters ----------------------------------------------------------

class ArgumentFilter(Mapping):
    """Map from symbols to the sorted tuple of argument positions kept."""

    def __init__(self, entries: Optional[Mapping[Symbol, Iterable[int]]] = None):
        self._m: dict[Symbol, tuple[int, ...]] = {}
        for f, idx in (entries or {}).items():
            idx = tuple(sorted(set(idx)))
            if any(i < 1 or i > f.arity for i in idx):
                raise ValueError(f"filter for {f} out of range: {idx}")
            self._m[f] = idx

    def __getitem__(self, f: Symbol) -> tuple[int, ...]:
        try:
            return self._m[f]
        except KeyError:
            raise UnmappedSymbol(f) from None

    def __iter__(self):
        return iter(self._m)

    def __len__(self) -> int:
        return len(self._m)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ArgumentFilter) and self._m == other._m

    def __hash__(self):
        return hash(frozenset(self._m.items()))

    def updated(self, changes: Mapping[Symbol, Iterable[int]]) -> "ArgumentFilter":
        m = dict(self._m)
        m.update({f: tuple(v) for f, v in changes.items()})
        return ArgumentFilter(m)

    def remove(self, f: Symbol, i: int) -> "ArgumentFilter":
        return self.updated({f: [j for j in self[f] if j != i]})

    def with_defaults(self, symbols: Iterable[Symbol]) -> "ArgumentFilter":
        """Give every symbol without an entry the full argument set."""
        m = dict(self._m)
        for f in symbols:
            m.setdefault(f, tuple(range(1, f.arity + 1)))
        return ArgumentFilter(m)

    def lines(self) -> list[str]:
        return [f"pi({f}) = {{{','.join(map(str, v))}}}" for f, v in sorted(self._m.items(), key=lambda kv: sym_key(kv[0]))]

    def __repr__(self) -> str:
        return "ArgumentFilter({" + ", ".join(f"{f}: {v}" for f, v in self._m.items()) + "})"


def full_filter(symbols: Iterable[Symbol]) -> ArgumentFilter:
    return ArgumentFilter({f: range(1, f.arity + 1) for f in symbols})


def sym_key(f: Symbol) -> tuple:
    """Deterministic sort key for symbols."""
    label = tuple(sorted(f.label)) if f.label is not None else ()
    return (f.kind == "tuple", str(f), f.arity, f.kind, label)


def apply_filter(t: Term, pi: Mapping[Symbol, tuple[int, ...]]) -> Term:
    if isinstance(t, Var):
        return t
    keep = pi[t.sym]
    return App(t.sym.with_arity(len(keep)), [apply_filter(t.args[i - 1], pi) for i in keep])


def kept_var_positions(t: Term, pi: ArgumentFilter) -> list[tuple[Position, Var]]:
    """Variable positions of ``t`` that survive ``pi``, left to right."""
    out: list[tuple[Position, Var]] = []
    stack: list[tuple[Position, Term]] = [((), t)]
    while stack:
        pos, s = stack.pop()
        if isinstance(s, Var):
            out.append((pos, s))
            continue
        for i in reversed(pi[s.sym]):
            stack.append((pos + (i,), s.args[i - 1]))
    return out


# -- rules ---------------------------------------------------------------------

@dataclass(frozen=True)
class Rule:
    lhs: Term
    rhs: Term
    origin: Optional[Symbol] = field(default=None, compare=False)

    def __str__(self) -> str:
        return f"{term_str(self.lhs)} -> {term_str(self.rhs)}"

    def filtered(self, pi: ArgumentFilter) -> "Rule":
        return Rule(apply_filter(self.lhs, pi), apply_filter(self.rhs, pi), self.origin)

    def symbols(self) -> list[Symbol]:
        return list(dict.fromkeys(symbols_of(self.lhs) + symbols_of(self.rhs)))


@dataclass(frozen=True)
class Trs:
    rules: tuple[Rule, ...]

    def __iter__(self):
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def defined(self) -> list[Symbol]:
        return list(dict.fromkeys(r.lhs.sym for r in self.rules))

    def signature(self) -> list[Symbol]:
        seen: dict[Symbol, None] = {}
        for r in self.rules:
            for f in r.symbols():
                seen.setdefault(f)
        return list(seen)

    def __str__(self) -> str:
        return "\n".join(str(r) for r in self.rules)


def defined_symbols(rules: Iterable[Rule]) -> set[Symbol]:
    return {r.lhs.sym for r in rules}
