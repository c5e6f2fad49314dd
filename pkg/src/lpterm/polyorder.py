"""Reduction pairs from linear polynomial interpretations.

Each filtered symbol f of arity m is read as c0 + c1*x1 + ... + cm*xm
with natural coefficients bounded by ``max_coeff``.  A rule l -> r is
weakly decreasing when every coefficient of [l] - [r] is non-negative,
and strictly decreasing when in addition the constant part is at least 1.

Each constraint is kept as a polynomial in the unknown coefficients and
solved by interval propagation with splitting.  Verification is a
separate numeric evaluation of the resulting interpretation.
"""

from __future__ import annotations

import time
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional

from .terms import ArgumentFilter, Rule, Symbol, Term, Var, sym_key

CONST = None


@dataclass(frozen=True)
class Interpretation:
    """Coefficient vector (c0, c1, ..., cm) per symbol, over filtered arities."""

    coeffs: dict

    def of(self, f: Symbol) -> tuple[int, ...]:
        return self.coeffs[f]

    def lines(self) -> list[str]:
        out = []
        for f in sorted(self.coeffs, key=sym_key):
            c = self.coeffs[f]
            xs = [f"x{j}" for j in range(1, len(c))]
            terms = [(f"{k}*{x}" if k != 1 else x) for k, x in zip(c[1:], xs) if k]
            if c[0] or not terms:
                terms.append(str(c[0]))
            lhs = f"[{f}]" + (f"({','.join(xs)})" if xs else "")
            out.append(f"{lhs} = {' + '.join(terms)}")
        return out

    def to_json(self) -> dict:
        return {str(f): list(c) for f, c in sorted(self.coeffs.items(), key=lambda kv: sym_key(kv[0]))}


# -- numeric evaluation (used for verification) ------------------------------------

def linear_form(t: Term, pi: ArgumentFilter, interp: Interpretation) -> dict:
    if isinstance(t, Var):
        return {t: 1}
    c = interp.of(t.sym)
    keep = pi[t.sym]
    if len(c) != len(keep) + 1:
        raise ValueError(f"interpretation of {t.sym} has {len(c)} coefficients, expected {len(keep) + 1}")
    out: dict = {CONST: c[0]}
    for j, i in enumerate(keep, 1):
        if c[j] == 0:
            continue
        for k, v in linear_form(t.args[i - 1], pi, interp).items():
            out[k] = out.get(k, 0) + c[j] * v
    return out


def compare(rule: Rule, pi: ArgumentFilter, interp: Interpretation) -> tuple[bool, bool]:
    """(weakly decreasing, strictly decreasing) under ``interp``."""
    left = linear_form(rule.lhs, pi, interp)
    right = linear_form(rule.rhs, pi, interp)
    diff = {k: left.get(k, 0) - right.get(k, 0) for k in set(left) | set(right)}
    weak = all(v >= 0 for v in diff.values())
    return weak, weak and diff.get(CONST, 0) >= 1


def verify_reduction_pair(pairs: Sequence[Rule], rules: Sequence[Rule], pi: ArgumentFilter,
                          interp: Interpretation, strict: Sequence[int]) -> bool:
    """Independent check of a reduction-pair witness."""
    if not strict:
        return False
    try:
        if not all(compare(r, pi, interp)[0] for r in rules):
            return False
        for n, p in enumerate(pairs):
            weak, strong = compare(p, pi, interp)
            if not (strong if n in strict else weak):
                return False
    except (KeyError, ValueError):
        return False
    return all(min(c) >= 0 for c in interp.coeffs.values())


# -- symbolic search -----------------------------------------------------------------

class _Unknowns:
    def __init__(self):
        self.index: dict[tuple[Symbol, int], int] = {}
        self.keys: list[tuple[Symbol, int]] = []

    def __call__(self, f: Symbol, j: int) -> int:
        k = (f, j)
        if k not in self.index:
            self.index[k] = len(self.keys)
            self.keys.append(k)
        return self.index[k]


def _poly_add(a: dict, b: dict, sign: int = 1) -> dict:
    out = dict(a)
    for m, c in b.items():
        v = out.get(m, 0) + sign * c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def _poly_scale(p: dict, u: int) -> dict:
    return {tuple(sorted(m + (u,))): c for m, c in p.items()}


class _Compiler:
    def __init__(self, pi: ArgumentFilter, unknowns: _Unknowns):
        self.pi = pi
        self.u = unknowns
        self.memo: dict[Term, dict] = {}

    def form(self, t: Term) -> dict:
        if isinstance(t, Var):
            return {t: {(): 1}}
        if t in self.memo:
            return self.memo[t]
        out: dict = {CONST: {(self.u(t.sym, 0),): 1}}
        for j, i in enumerate(self.pi[t.sym], 1):
            uj = self.u(t.sym, j)
            for k, p in self.form(t.args[i - 1]).items():
                out[k] = _poly_add(out.get(k, {}), _poly_scale(p, uj))
        self.memo[t] = out
        return out

    def constraints(self, rule: Rule) -> dict:
        """Key -> polynomial [l]_k - [r]_k."""
        left, right = self.form(rule.lhs), self.form(rule.rhs)
        out = {}
        for k in list(left) + [k for k in right if k not in left]:
            out[k] = _poly_add(left.get(k, {}), right.get(k, {}), -1)
        return out


@dataclass
class _Constraint:
    terms: list  # (coef, monomial tuple)
    need: int


class SearchBudgetExceeded(Exception):
    pass


@dataclass
class SearchStats:
    nodes: int = 0


class _Search:
    """Interval propagation plus fail-first splitting over bounded naturals.

    Each unknown has an interval [lo, hi].  The largest value a constraint
    polynomial can reach puts positive monomials at upper bounds and
    negative ones at lower bounds; an interval is narrowed from either end
    while fixing the unknown at that end drops the maximum below ``need``.
    """

    def __init__(self, n: int, cons: list[_Constraint], maxc: int,
                 deadline: Optional[float], node_limit: int):
        self.n = n
        self.cons = cons
        self.maxc = maxc
        self.deadline = deadline
        self.node_limit = node_limit
        self.stats = SearchStats()
        self.members = [sorted({u for _, m in c.terms for u in m}) for c in cons]
        self.touching: list[list[int]] = [[] for _ in range(n)]
        for ci, ms in enumerate(self.members):
            for u in ms:
                self.touching[u].append(ci)

    @staticmethod
    def _max_with(c: _Constraint, lo: list, hi: list, u: int, v: int) -> int:
        total = 0
        for coef, mono in c.terms:
            prod = coef
            bounds = hi if coef > 0 else lo
            for w in mono:
                prod *= v if w == u else bounds[w]
                if prod == 0:
                    break
            total += prod
        return total

    def _propagate(self, lo: list, hi: list, queue: list[int]) -> bool:
        queue = list(queue)
        pending = set(queue)
        while queue:
            ci = queue.pop()
            pending.discard(ci)
            c = self.cons[ci]
            if self._max_with(c, lo, hi, -1, 0) < c.need:
                return False
            for u in self.members[ci]:
                a, b = lo[u], hi[u]
                if a == b:
                    continue
                while a <= b and self._max_with(c, lo, hi, u, a) < c.need:
                    a += 1
                while b > a and self._max_with(c, lo, hi, u, b) < c.need:
                    b -= 1
                if a > b:
                    return False
                if (a, b) != (lo[u], hi[u]):
                    lo[u], hi[u] = a, b
                    for cj in self.touching[u]:
                        if cj not in pending:
                            pending.add(cj)
                            queue.append(cj)
        return True

    @staticmethod
    def _min(c: _Constraint, lo: list, hi: list) -> int:
        total = 0
        for coef, mono in c.terms:
            prod = coef
            bounds = lo if coef > 0 else hi
            for w in mono:
                prod *= bounds[w]
                if prod == 0:
                    break
            total += prod
        return total

    def run(self, fixed: dict[int, int]) -> Optional[list[int]]:
        lo = [0] * self.n
        hi = [self.maxc] * self.n
        for u, v in fixed.items():
            lo[u] = hi[u] = v
        self.failed: set = set()
        if self._solve(lo, hi, list(range(len(self.cons)))):
            return lo
        return None

    def _tick(self) -> None:
        st = self.stats
        st.nodes += 1
        if st.nodes > self.node_limit:
            raise SearchBudgetExceeded
        if self.deadline is not None and st.nodes % 64 == 0 and time.monotonic() > self.deadline:
            raise SearchBudgetExceeded

    def _components(self, lo: list, hi: list, active: list[int]) -> list[list[int]]:
        """Group the active constraints by shared open unknowns."""
        owner: dict[int, int] = {}
        parent = list(range(len(active)))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for k, ci in enumerate(active):
            for u in self.members[ci]:
                if lo[u] < hi[u]:
                    if u in owner:
                        a, b = find(owner[u]), find(k)
                        if a != b:
                            parent[max(a, b)] = min(a, b)
                    else:
                        owner[u] = k
        groups: dict[int, list[int]] = {}
        for k, ci in enumerate(active):
            groups.setdefault(find(k), []).append(ci)
        return list(groups.values())

    def _solve(self, lo: list, hi: list, active: list[int]) -> bool:
        """Narrow lo/hi in place to a solution of ``active``; False if none."""
        self._tick()
        queue = active
        while True:
            if not self._propagate(lo, hi, queue):
                return False
            active = [ci for ci in active if self._min(self.cons[ci], lo, hi) < self.cons[ci].need]
            # Constraints are monotone in an unknown that occurs with one sign only.
            sign: dict[int, int] = {}
            for ci in active:
                for coef, mono in self.cons[ci].terms:
                    for u in mono:
                        if lo[u] < hi[u]:
                            sign[u] = sign.get(u, 0) | (1 if coef > 0 else 2)
            moved = [u for u, sg in sign.items() if sg != 3]
            if not moved:
                break
            for u in moved:
                if sign[u] == 1:
                    lo[u] = hi[u]
                else:
                    hi[u] = lo[u]
            queue = sorted({ci for u in moved for ci in self.touching[u]} & set(active))
        if not active:
            for u in range(self.n):
                hi[u] = lo[u]
            return True
        for group in sorted(self._components(lo, hi, active), key=len):
            if not self._split(lo, hi, group):
                return False
        return True

    def _split(self, lo: list, hi: list, group: list[int]) -> bool:
        members = sorted({u for ci in group for u in self.members[ci]})
        open_vars = [u for u in members if lo[u] < hi[u]]
        key = (tuple(group), tuple((lo[u], hi[u]) for u in members))
        if key in self.failed:
            return False
        best = min(open_vars, key=lambda u: (hi[u] - lo[u], -len(self.touching[u]), u))
        for v in range(lo[best], hi[best] + 1):
            lo2, hi2 = list(lo), list(hi)
            lo2[best] = hi2[best] = v
            if self._solve(lo2, hi2, group):
                for u in open_vars:
                    lo[u], hi[u] = lo2[u], lo2[u]
                return True
        self.failed.add(key)
        return False


@dataclass(frozen=True)
class ReductionPairResult:
    interpretation: Interpretation
    strict: tuple[int, ...]
    nodes: int


def find_reduction_pair(pairs: Sequence[Rule], rules: Sequence[Rule], pi: ArgumentFilter,
                        max_coeff: int = 2, deadline: Optional[float] = None,
                        node_limit: int = 2_000_000) -> Optional[ReductionPairResult]:
    """Search a linear interpretation orienting all rules weakly, all pairs
    weakly and at least one pair strictly.

    First tries to make every pair strict, then asks only that the constant
    parts sum to at least 1; with all of them non-negative integers that
    means some pair is strict.  Each attempt raises the coefficient bound
    from 1 up to ``max_coeff``.
    Returns None when the bounded space holds no solution; raises
    SearchBudgetExceeded when the node limit or deadline is hit.
    """
    unknowns = _Unknowns()
    comp = _Compiler(pi, unknowns)
    for r in list(pairs) + list(rules):
        for t in (r.lhs, r.rhs):
            for f in _symbols(t, pi):
                for j in range(len(pi[f]) + 1):
                    unknowns(f, j)
    base: list[_Constraint] = []
    for r in rules:
        base.extend(_Constraint(_terms(p), 0) for p in comp.constraints(r).values())
    consts = []
    for p in pairs:
        cons = comp.constraints(p)
        base.extend(_Constraint(_terms(q), 0) for k, q in cons.items() if k is not CONST)
        consts.append(cons.get(CONST, {}))
    some = {}
    for c in consts:
        some = _poly_add(some, c)
    attempts = [[_Constraint(_terms(c), 1) for c in consts]] if len(pairs) > 1 else []
    attempts.append([_Constraint(_terms(c), 0) for c in consts] + [_Constraint(_terms(some), 1)])
    n = len(unknowns.keys)
    total = 0
    for extra in attempts:
        hard = base + extra
        hard = [c for c in hard if c.need > 0 or any(coef < 0 for coef, _ in c.terms)]
        sol = None
        # Small coefficients first: a solution near zero is found long
        # before the search would reach it inside the full box.
        for bound in range(1, max_coeff + 1):
            search = _Search(n, hard, bound, deadline, node_limit - total)
            try:
                sol = search.run(_one_signed(n, hard, bound))
            finally:
                total += search.stats.nodes
            if sol is not None:
                break
        if sol is None:
            continue
        coeffs: dict[Symbol, list[int]] = {}
        for (f, j), idx in unknowns.index.items():
            coeffs.setdefault(f, [0] * (len(pi[f]) + 1))[j] = sol[idx]
        interp = Interpretation({f: tuple(c) for f, c in coeffs.items()})
        found = tuple(k for k, p in enumerate(pairs) if compare(p, pi, interp)[1])
        return ReductionPairResult(interp, found, total)
    return None


def _one_signed(n: int, cons: list[_Constraint], maxc: int) -> dict[int, int]:
    """Unknowns occurring with one sign only can be fixed at the best end."""
    pos = [False] * n
    neg = [False] * n
    for c in cons:
        for coef, m in c.terms:
            for u in m:
                if coef > 0:
                    pos[u] = True
                else:
                    neg[u] = True
    return {u: (maxc if pos[u] else 0) for u in range(n) if not (pos[u] and neg[u])}


def _terms(p: dict) -> list:
    return sorted(((c, m) for m, c in p.items()), key=lambda cm: (cm[0] > 0, len(cm[1])))


def _symbols(t: Term, pi: ArgumentFilter) -> list[Symbol]:
    out: list[Symbol] = []
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Var):
            continue
        out.append(s.sym)
        stack.extend(s.args[i - 1] for i in pi[s.sym])
    return out
