"""Random programs, terms and positions for property tests."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from lpterm.terms import App, Symbol, Var

FUNCTIONS = [Symbol("a", 0), Symbol("b", 0), Symbol("s", 1), Symbol("f", 1), Symbol("h", 2)]
PREDICATES = [("p", 1), ("q", 2), ("r", 2)]
VARS = ["X", "Y", "Z", "W"]


def term_text(rng: random.Random, depth: int, ground: bool = False) -> str:
    if not ground and rng.random() < 0.4:
        return rng.choice(VARS)
    pool = [f for f in FUNCTIONS if f.arity == 0] if depth <= 0 else FUNCTIONS
    f = rng.choice(pool)
    if f.arity == 0:
        return f.name
    return f"{f.name}({','.join(term_text(rng, depth - 1, ground) for _ in range(f.arity))})"


def atom_text(rng: random.Random, pred: tuple[str, int], depth: int = 2, ground: bool = False) -> str:
    name, n = pred
    return f"{name}({','.join(term_text(rng, rng.randint(0, depth), ground) for _ in range(n))})"


def program_text(rng: random.Random, max_clauses: int = 4, max_body: int = 2) -> str:
    """Definite program over a fixed small signature; clause 1 defines the entry predicate."""
    lines = []
    for k in range(rng.randint(1, max_clauses)):
        head = PREDICATES[0] if k == 0 else rng.choice(PREDICATES)
        body = [atom_text(rng, rng.choice(PREDICATES)) for _ in range(rng.randint(0, max_body))]
        lines.append(atom_text(rng, head) + (" :- " + ", ".join(body) if body else "") + ".")
    return "\n".join(lines) + "\n"


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def programs(draw, max_clauses: int = 4, max_body: int = 2) -> str:
    return program_text(random.Random(draw(seeds)), max_clauses, max_body)


@st.composite
def terms(draw, depth: int = 3, symbols=None) -> App:
    """Random non-variable term with a random mix of symbol kinds."""
    symbols = symbols or FUNCTIONS + [Symbol("u1", 3, "u"), Symbol("p", 2, "in"), Symbol("g", 2)]

    def go(d: int):
        if d <= 0 or draw(st.integers(0, 3)) == 0:
            consts = [f for f in symbols if f.arity == 0]
            if draw(st.booleans()):
                return Var(draw(st.sampled_from(VARS)))
            return App(draw(st.sampled_from(consts)), ())
        f = draw(st.sampled_from([f for f in symbols if f.arity > 0]))
        return App(f, [go(d - 1) for _ in range(f.arity)])

    f = draw(st.sampled_from([f for f in symbols if f.arity > 0]))
    return App(f, [go(depth - 1) for _ in range(f.arity)])


def fn(name: str, *args, kind: str = "function") -> App:
    """Build ``name(args)``; strings become variables."""
    args = [Var(a) if isinstance(a, str) else a for a in args]
    return App(Symbol(name, len(args), kind), args)


def acyclic_pairs():
    """Pairs of terms over shared variables (unifiable or not)."""
    syms = [Symbol("a", 0), Symbol("s", 1), Symbol("h", 2)]
    return st.tuples(terms(3, syms), terms(3, syms))
