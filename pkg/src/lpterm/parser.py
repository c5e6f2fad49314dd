"""Reader for definite logic programs and their query annotations.

Accepted syntax is the pure Prolog subset: facts, rules with a
comma-separated body, compound terms, list notation and integer
constants.  ``[X|L]`` becomes ``'.'(X,L)`` and ``[]`` is a constant.
Query classes are given in comment directives::

    %query: append(i,o,o)
    %filter: rotate = [1], '.' = [2]
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import LPSyntaxError, NotWellModed, UnknownSymbol, UnsupportedFeature
from .terms import App, ArgumentFilter, Symbol, Term, Var, sym_key, term_str, term_vars, vars_of

CONS = Symbol(".", 2)
NIL = Symbol("[]", 0)

BUILTINS = {
    "true", "fail", "false", "call", "is", "=", "\\=", "==", "\\==", "<", ">", "=<", ">=",
    "=:=", "=\\=", "=..", "functor", "arg", "copy_term", "var", "nonvar", "atom", "number",
    "integer", "atomic", "compound", "write", "writeln", "nl", "read", "assert", "asserta",
    "assertz", "retract", "findall", "bagof", "setof", "not", "once", "halt",
}


@dataclass(frozen=True)
class Clause:
    head: App
    body: tuple[App, ...] = ()

    def __str__(self) -> str:
        if not self.body:
            return term_str(self.head) + "."
        return term_str(self.head) + " :- " + ", ".join(term_str(b) for b in self.body) + "."

    def variables(self) -> list[Var]:
        return vars_of((self.head,) + self.body)


@dataclass(frozen=True)
class Program:
    clauses: tuple[Clause, ...]
    functions: tuple[Symbol, ...]
    predicates: tuple[Symbol, ...]

    def __str__(self) -> str:
        return "\n".join(str(c) for c in self.clauses)

    def clauses_of(self, p: Symbol) -> list[Clause]:
        return [c for c in self.clauses if c.head.sym == p]

    def symbol(self, name: str, arity: Optional[int] = None, kind: Optional[str] = None) -> Symbol:
        found = [f for f in self.functions + self.predicates
                 if f.name == name and (arity is None or f.arity == arity) and (kind is None or f.kind == kind)]
        if not found:
            raise UnknownSymbol(f"no symbol named {name!r}" + (f" with arity {arity}" if arity is not None else ""))
        if len(found) > 1:
            raise UnknownSymbol(f"symbol name {name!r} is ambiguous; write {name}/<arity>")
        return found[0]


@dataclass(frozen=True)
class Moding:
    """Input/output mode per predicate argument ('i' or 'o')."""

    modes: dict = field(default_factory=dict)

    def of(self, p: Symbol) -> tuple[str, ...]:
        return self.modes.get(p, ("i",) * p.arity)

    def inputs(self, p: Symbol) -> tuple[int, ...]:
        return tuple(i for i, m in enumerate(self.of(p), 1) if m == "i")

    def outputs(self, p: Symbol) -> tuple[int, ...]:
        return tuple(i for i, m in enumerate(self.of(p), 1) if m == "o")


@dataclass(frozen=True)
class QuerySpec:
    """Class of queries: a moding or an initial filter, plus the entry predicate."""

    moding: Optional[Moding] = None
    filter: Optional[ArgumentFilter] = None
    entry: Optional[Symbol] = None

    def initial_filter(self, program: Program) -> ArgumentFilter:
        """Filter over function and predicate symbols; absent entries are full."""
        entries: dict[Symbol, tuple[int, ...]] = {}
        if self.moding is not None:
            for p in program.predicates:
                entries[p] = self.moding.inputs(p)
        if self.filter is not None:
            entries.update(self.filter)
        return ArgumentFilter(entries).with_defaults(program.functions + program.predicates)

    def derived_moding(self, program: Program) -> Moding:
        """Moding whose inputs are the positions kept by the initial filter."""
        pi = self.initial_filter(program)
        return Moding({p: tuple("i" if i in pi[p] else "o" for i in range(1, p.arity + 1))
                       for p in program.predicates})

    def describe(self) -> str:
        parts = []
        if self.moding is not None:
            for p, m in self.moding.modes.items():
                parts.append(f"{p.name}({','.join(m)})")
        if self.filter is not None:
            for f, v in self.filter.items():
                parts.append(f"pi({f}/{f.arity}) = {{{','.join(map(str, v))}}}")
        return "; ".join(parts) if parts else "all arguments ground"


# -- tokenizer ---------------------------------------------------------------

_SYMCH = "+-*/\\^<>=~:.?@#&$"
_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<comment>%[^\n]*)"
    r"|(?P<block>/\*.*?\*/)"
    r"|(?P<var>[A-Z_][A-Za-z0-9_]*)"
    r"|(?P<atom>[a-z][A-Za-z0-9_]*)"
    r"|(?P<num>\d+)"
    r"|(?P<qatom>'(?:[^'\\]|\\.|'')*')"
    r"|(?P<str>\"(?:[^\"\\]|\\.)*\")"
    r"|(?P<punct>[()\[\],|!;])"
    r"|(?P<sym>[" + re.escape(_SYMCH) + r"]+)",
    re.S,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(src: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise LPSyntaxError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        if kind == "sym" and text == "." and (m.end() == len(src) or src[m.end()] in " \t\r\n%"):
            toks.append(_Tok("end", text, line, col))
        elif kind == "sym" and text.endswith(".") and len(text) > 1 and (m.end() == len(src) or src[m.end()] in " \t\r\n%"):
            toks.append(_Tok("sym", text[:-1], line, col))
            toks.append(_Tok("end", ".", line, col + len(text) - 1))
        elif kind == "qatom":
            toks.append(_Tok("atom", text[1:-1].replace("''", "'").replace("\\'", "'"), line, col))
        elif kind not in ("ws", "comment", "block"):
            toks.append(_Tok(kind, text, line, col))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = m.start() + text.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Reader:
    def __init__(self, src: str):
        self.toks = _tokenize(src)
        self.i = 0
        self.anon = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def err(self, msg: str, tok: Optional[_Tok] = None) -> LPSyntaxError:
        tok = tok or self.tok
        return LPSyntaxError(msg, tok.line, tok.col)

    def expect(self, kind: str, text: Optional[str] = None) -> _Tok:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            raise self.err(f"expected {text or kind}, found {t.text or t.kind!r}")
        self.i += 1
        return t

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def clauses(self) -> list[tuple[Term, list[Term], _Tok]]:
        out = []
        while not self.at("eof"):
            start = self.tok
            if self.at("sym", ":-") or self.at("sym", "?-"):
                raise UnsupportedFeature(f"directive at line {start.line} is not supported")
            head = self.term()
            body: list[Term] = []
            if self.at("sym", ":-"):
                self.i += 1
                body.append(self.goal())
                while self.at("punct", ","):
                    self.i += 1
                    body.append(self.goal())
            self.check_operator()
            self.expect("end")
            out.append((head, body, start))
        return out

    def check_operator(self) -> None:
        t = self.tok
        if t.kind == "sym" or (t.kind == "atom" and t.text == "is") or (t.kind == "punct" and t.text in ";|"):
            if t.text == ";":
                raise UnsupportedFeature(f"disjunction at {t.line}:{t.col} is not supported")
            raise UnsupportedFeature(f"operator {t.text!r} at {t.line}:{t.col} is not supported")

    def goal(self) -> Term:
        t = self.tok
        if t.kind == "punct" and t.text == "!":
            raise UnsupportedFeature(f"cut at {t.line}:{t.col} is not supported")
        if t.kind == "sym" and t.text == "\\+":
            raise UnsupportedFeature(f"negation at {t.line}:{t.col} is not supported")
        g = self.term()
        self.check_operator()
        return g

    def term(self) -> Term:
        t = self.tok
        if t.kind == "var":
            self.i += 1
            if t.text == "_":
                self.anon += 1
                return Var(f"_{self.anon}")
            return Var(t.text)
        if t.kind == "num":
            self.i += 1
            return ("atom", t.text, [])
        if t.kind == "punct" and t.text == "[":
            return self.list_term()
        if t.kind == "punct" and t.text == "(":
            self.i += 1
            inner = self.term()
            self.check_operator()
            self.expect("punct", ")")
            return inner
        if t.kind == "str":
            raise UnsupportedFeature(f"string literal at {t.line}:{t.col} is not supported")
        if t.kind == "punct" and t.text == "!":
            raise UnsupportedFeature(f"cut at {t.line}:{t.col} is not supported")
        if t.kind == "sym" and t.text == "\\+":
            raise UnsupportedFeature(f"negation at {t.line}:{t.col} is not supported")
        if t.kind in ("atom", "sym"):
            self.i += 1
            args: list[Term] = []
            if self.at("punct", "("):
                self.i += 1
                args.append(self.term())
                self.check_operator()
                while self.at("punct", ","):
                    self.i += 1
                    args.append(self.term())
                    self.check_operator()
                self.expect("punct", ")")
            elif t.kind == "sym":
                raise UnsupportedFeature(f"operator {t.text!r} at {t.line}:{t.col} is not supported")
            return ("atom", t.text, args)
        raise self.err(f"unexpected token {t.text or t.kind!r}")

    def list_term(self) -> Term:
        self.expect("punct", "[")
        if self.at("punct", "]"):
            self.i += 1
            return ("atom", "[]", [])
        items = [self.term()]
        self.check_list_op()
        while self.at("punct", ","):
            self.i += 1
            items.append(self.term())
            self.check_list_op()
        tail: Term = ("atom", "[]", [])
        if self.at("punct", "|"):
            self.i += 1
            tail = self.term()
        self.expect("punct", "]")
        for x in reversed(items):
            tail = ("atom", ".", [x, tail])
        return tail

    def check_list_op(self) -> None:
        if self.tok.kind == "sym" or (self.tok.kind == "atom" and self.tok.text == "is"):
            self.check_operator()


def _build(raw, kind: str, funcs: dict, preds: dict):
    """Turn reader output into terms, creating symbols on the way."""
    if isinstance(raw, Var):
        return raw
    _, name, args = raw
    table = preds if kind == "predicate" else funcs
    key = (name, len(args))
    if key not in table:
        table[key] = Symbol(name, len(args), kind)
    return App(table[key], [_build(a, "function", funcs, preds) for a in args])


def parse_program(text: str) -> Program:
    reader = _Reader(text)
    raw_clauses = reader.clauses()
    funcs: dict = {}
    preds: dict = {}
    clauses = []
    for head, body, tok in raw_clauses:
        for atom in [head] + body:
            if isinstance(atom, Var):
                raise UnsupportedFeature(f"variable used as goal at line {tok.line}")
        h = _build(head, "predicate", funcs, preds)
        b = tuple(_build(a, "predicate", funcs, preds) for a in body)
        clauses.append(Clause(h, b))
    defined = {c.head.sym for c in clauses}
    for c in clauses:
        for a in c.body:
            if a.sym.name in BUILTINS and a.sym not in defined:
                raise UnsupportedFeature(f"built-in predicate {a.sym.name}/{a.sym.arity} is not supported")
    functions = list(funcs.values())
    if not any(f.arity == 0 for f in functions):
        # T(Sigma) must be non-empty
        taken = {f.name for f in functions} | {p.name for p in preds.values()}
        name = next(n for n in ("a", "c", "a0", "a1", "a2", "a3") if n not in taken)
        functions.append(Symbol(name, 0))
    return Program(tuple(clauses), tuple(functions), tuple(preds.values()))


# -- query directives ------------------------------------------------------------

_DIRECTIVE = re.compile(r"^\s*%+\s*(query|filter)\s*:(.*)$", re.M)


def parse_query_spec(text: str, program: Program) -> Optional[QuerySpec]:
    """Collect ``%query`` and ``%filter`` directives from program text."""
    moding: dict[Symbol, tuple[str, ...]] = {}
    filt: dict[Symbol, tuple[int, ...]] = {}
    entry = None
    found = False
    for m in _DIRECTIVE.finditer(text):
        found = True
        line = text.count("\n", 0, m.start()) + 1
        body = m.group(2).strip()
        if m.group(1) == "query":
            p, modes = _parse_query(body, line, program)
            moding[p] = modes
            entry = entry or p
        else:
            for f, idx in _parse_filter(body, line, program):
                filt[f] = idx
                if f.kind == "predicate" and not moding:
                    entry = entry or f
    if not found:
        return None
    return QuerySpec(Moding(moding) if moding else None, ArgumentFilter(filt) if filt else None, entry)


def _parse_query(body: str, line: int, program: Program) -> tuple[Symbol, tuple[str, ...]]:
    body = body.rstrip(".").strip()
    m = re.fullmatch(r"('(?:[^']|'')*'|[a-z][A-Za-z0-9_]*)\s*(?:\((.*)\))?", body)
    if m is None:
        raise LPSyntaxError(f"malformed query directive {body!r}", line, 1)
    name = m.group(1).strip("'")
    modes = tuple(x.strip() for x in m.group(2).split(",")) if m.group(2) is not None else ()
    for x in modes:
        if x not in ("i", "o", "b", "f"):
            raise LPSyntaxError(f"mode must be i or o, found {x!r}", line, 1)
    modes = tuple("i" if x in ("i", "b") else "o" for x in modes)
    p = program.symbol(name, len(modes), "predicate")
    return p, modes


def _split_entries(body: str) -> list[str]:
    parts, depth, cur, quoted = [], 0, "", False
    for ch in body:
        if ch == "'":
            quoted = not quoted
        if not quoted and ch == "[":
            depth += 1
        if not quoted and ch == "]":
            depth -= 1
        if not quoted and depth == 0 and ch in ",.":
            if cur.strip():
                parts.append(cur.strip())
            cur = ""
            continue
        cur += ch
    if cur.strip():
        parts.append(cur.strip())
    return parts


def _parse_filter(body: str, line: int, program: Program) -> list[tuple[Symbol, tuple[int, ...]]]:
    out = []
    for entry in _split_entries(body):
        m = re.fullmatch(r"('(?:[^']|'')*'|[a-z0-9][A-Za-z0-9_]*|\[\])\s*(?:/\s*(\d+))?\s*=\s*\[([\d\s,]*)\]", entry)
        if m is None:
            raise LPSyntaxError(f"malformed filter entry {entry!r}", line, 1)
        name = m.group(1)
        if name.startswith("'"):
            name = name[1:-1].replace("''", "'")
        arity = int(m.group(2)) if m.group(2) else None
        idx = tuple(int(x) for x in m.group(3).replace(",", " ").split())
        f = program.symbol(name, arity)
        if any(i < 1 or i > f.arity for i in idx):
            raise LPSyntaxError(f"filter position out of range for {name}/{f.arity}", line, 1)
        out.append((f, tuple(sorted(set(idx)))))
    return out


def parse_file(path: str | Path) -> tuple[Program, Optional[QuerySpec]]:
    text = Path(path).read_text()
    program = parse_program(text)
    return program, parse_query_spec(text, program)


# -- well-modedness --------------------------------------------------------------

def _vars_at(atom: App, idx: tuple[int, ...]) -> list[Var]:
    return vars_of(atom.args[i - 1] for i in idx)


def check_well_moded(program: Program, moding: Moding) -> None:
    """Raise NotWellModed with a witness if some clause breaks the moding."""
    for n, c in enumerate(program.clauses, 1):
        known = set(_vars_at(c.head, moding.inputs(c.head.sym)))
        for k, b in enumerate(c.body, 1):
            for v in _vars_at(b, moding.inputs(b.sym)):
                if v not in known:
                    raise NotWellModed(f"clause {n}, body atom {k} ({term_str(b)}): input variable {v} is not bound")
            known |= set(_vars_at(b, moding.outputs(b.sym)))
        for v in _vars_at(c.head, moding.outputs(c.head.sym)):
            if v not in known:
                raise NotWellModed(f"clause {n} ({term_str(c.head)}): output variable {v} is not bound")


def sorted_symbols(symbols) -> list[Symbol]:
    return sorted(symbols, key=sym_key)


__all__ = [
    "Clause", "Program", "Moding", "QuerySpec", "CONS", "NIL",
    "parse_program", "parse_query_spec", "parse_file", "check_well_moded", "sorted_symbols",
]
