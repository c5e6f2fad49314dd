"""End-to-end termination proofs for a program and a class of queries."""

from __future__ import annotations

import hashlib
import os
import time
from dataclasses import dataclass, field, fields, replace
from typing import Optional

from .dp import (
    DPProblem, argument_filter_processor, dependency_graph_processor, dependency_pairs,
)
from .errors import LPTermError
from .parser import Moding, Program, QuerySpec
from .polyorder import SearchBudgetExceeded, find_reduction_pair, verify_reduction_pair
from .refine import HEURISTICS, refine_basic, refine_modesplit
from .terms import ArgumentFilter, Trs, full_filter
from .transform import extend_initial_filter, transform_classical, transform_new
from .typeinfo import infer_types

TERMINATING = "TERMINATING"
UNKNOWN = "UNKNOWN"

ENV_PREFIX = "LPTERM_"
PROOF_FORMATS = ("text", "json")


@dataclass(frozen=True)
class Config:
    heuristic: str = "tb2"
    mode_splitting: bool = True
    max_coeff: int = 2
    timeout: float = 60.0
    classical: bool = False
    max_steps: int = 50
    node_limit: int = 2_000_000
    proof_format: str = "text"
    emit_trs: bool = False

    def __post_init__(self):
        if self.heuristic not in HEURISTICS:
            raise ValueError(f"heuristic must be one of {', '.join(HEURISTICS)}")
        if self.proof_format not in PROOF_FORMATS:
            raise ValueError(f"proof format must be one of {', '.join(PROOF_FORMATS)}")
        if not 1 <= self.max_coeff <= 5:
            raise ValueError("max_coeff must lie in 1..5")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")

    def with_env(self, environ: Optional[dict] = None) -> "Config":
        """Override fields from LPTERM_<FIELD> environment variables."""
        environ = os.environ if environ is None else environ
        changes: dict = {}
        for f in fields(self):
            raw = environ.get(ENV_PREFIX + f.name.upper())
            if raw is None:
                continue
            if isinstance(getattr(self, f.name), bool):
                changes[f.name] = raw.strip().lower() in ("1", "on", "true", "yes")
            elif isinstance(getattr(self, f.name), int):
                changes[f.name] = int(raw)
            elif isinstance(getattr(self, f.name), float):
                changes[f.name] = float(raw)
            else:
                changes[f.name] = raw.strip()
        return replace(self, **changes)

    def describe(self) -> str:
        if self.classical:
            return f"classical transformation, max-coeff={self.max_coeff}"
        split = "on" if self.mode_splitting else "off"
        return f"heuristic={self.heuristic}, mode-splitting={split}, max-coeff={self.max_coeff}"


@dataclass
class Step:
    problem: str
    processor: str
    lines: list[str]
    children: list[str] = field(default_factory=list)
    data: dict = field(default_factory=dict)


@dataclass
class Proof:
    verdict: str
    reason: str
    config: Config
    program: Program
    query: str
    trs: Trs
    refined: Trs
    filter: ArgumentFilter
    problems: dict = field(default_factory=dict)
    steps: list[Step] = field(default_factory=list)

    def problem_hash(self, pid: str) -> str:
        return hashlib.sha256(self.problems[pid].canonical().encode()).hexdigest()[:16]

    def text(self) -> str:
        out = ["Program:"]
        out += ["  " + str(c) for c in self.program.clauses]
        out.append(f"Queries: {self.query}")
        out.append(f"Settings: {self.config.describe()}")
        out.append(f"Transformed TRS ({len(self.trs)} rules):")
        out += ["  " + str(r) for r in self.trs]
        if self.refined != self.trs:
            out.append(f"Refined TRS ({len(self.refined)} rules):")
            out += ["  " + str(r) for r in self.refined]
        used = {f for r in self.refined for f in r.symbols()}
        if "P1" in self.problems:
            used |= {f for p in self.problems["P1"].pairs for f in p.symbols()}
        out.append("Argument filter:")
        out += ["  " + line for line, f in _filter_lines(self.filter) if f in used]
        if "P1" in self.problems:
            p1 = self.problems["P1"]
            out.append(f"Dependency pairs ({len(p1.pairs)}):")
            out += [f"  {n}: {p}" for n, p in zip(p1.names, p1.pairs)]
        for s in self.steps:
            out.append(f"[{s.problem}] {s.processor} (problem {self.problem_hash(s.problem)})")
            out += ["  " + line for line in s.lines]
        out.append(f"Result: {self.verdict}" + (f" ({self.reason})" if self.reason else ""))
        return "\n".join(out) + "\n"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "settings": self.config.describe(),
            "queries": self.query,
            "trs": [str(r) for r in self.trs],
            "refined_trs": [str(r) for r in self.refined],
            "filter": {str(f): list(v) for f, v in sorted(self.filter.items(), key=lambda kv: str(kv[0]))},
            "problems": {
                pid: {
                    "hash": self.problem_hash(pid),
                    "pairs": {n: str(p) for n, p in zip(pr.names, pr.pairs)},
                }
                for pid, pr in self.problems.items()
            },
            "steps": [
                {"problem": s.problem, "processor": s.processor, "children": s.children, **s.data}
                for s in self.steps
            ],
        }


def _filter_lines(pi: ArgumentFilter):
    from .terms import sym_key
    for f in sorted(pi, key=sym_key):
        yield f"pi({f}) = {{{','.join(map(str, pi[f]))}}}", f


class _Timeout(Exception):
    pass


class _Solver:
    def __init__(self, proof: Proof, config: Config, deadline: float):
        self.proof = proof
        self.config = config
        self.deadline = deadline
        self.reason = ""

    def tick(self) -> None:
        if time.monotonic() > self.deadline:
            raise _Timeout

    def register(self, pid: str, problem: DPProblem) -> None:
        self.proof.problems[pid] = problem

    def solve(self, problem: DPProblem, pid: str, applied: int, af_used: bool) -> bool:
        self.register(pid, problem)
        if not problem.pairs:
            return True
        if applied >= self.config.max_steps:
            self.reason = "processor limit reached"
            return False
        self.tick()
        g = dependency_graph_processor(problem)
        arcs = [f"{problem.names[i]}->{problem.names[j]}" for i in sorted(g.arcs) for j in g.arcs[i]]
        step = Step(pid, "Dependency graph processor", [f"arcs: {', '.join(arcs) if arcs else 'none'}"],
                    data={"arcs": arcs})
        self.proof.steps.append(step)
        if not g.subproblems:
            step.lines.append("no cycles; problem solved")
        comps = []
        for n, (comp, sub) in enumerate(zip(g.components, g.subproblems), 1):
            sid = f"{pid}.{n}"
            names = "{" + ",".join(problem.names[i] for i in comp) + "}"
            step.lines.append(f"SCC {names} -> {sid}")
            step.children.append(sid)
            comps.append([problem.names[i] for i in comp])
        step.data["sccs"] = comps
        for sid, sub in zip(step.children, g.subproblems):
            if not self.solve_scc(sub, sid, applied + 1, af_used):
                return False
        return True

    def solve_scc(self, problem: DPProblem, pid: str, applied: int, af_used: bool) -> bool:
        self.register(pid, problem)
        if applied >= self.config.max_steps:
            self.reason = "processor limit reached"
            return False
        self.tick()
        found = None
        note = ""
        try:
            found = find_reduction_pair(problem.pairs, problem.rules, problem.filter,
                                        self.config.max_coeff, self.deadline, self.config.node_limit)
        except SearchBudgetExceeded:
            self.tick()
            note = "search budget exhausted"
        if found is not None:
            ok = verify_reduction_pair(problem.pairs, problem.rules, problem.filter,
                                       found.interpretation, found.strict)
            if not ok:
                raise LPTermError("reduction pair witness failed verification")
            removed = [problem.names[i] for i in found.strict]
            keep = [i for i in range(len(problem.pairs)) if i not in found.strict]
            sid = f"{pid}.1"
            lines = ["interpretation:"] + ["  " + line for line in found.interpretation.lines()]
            lines.append(f"strictly decreasing: {', '.join(removed)}")
            lines.append(f"witness re-verified: yes -> {sid}")
            self.proof.steps.append(Step(pid, "Reduction pair processor", lines, [sid], {
                "interpretation": found.interpretation.to_json(),
                "removed": removed,
                "verified": True,
            }))
            return self.solve(problem.subproblem(keep), sid, applied + 1, af_used)
        is_identity = all(len(v) == f.arity for f, v in problem.filter.items())
        if not af_used and not is_identity:
            sid = f"{pid}.1"
            after = argument_filter_processor(problem)
            lines = [f"no reduction pair found{' (' + note + ')' if note else ''}; applying the filter"]
            lines += [f"{n}: {p}" for n, p in zip(after.names, after.pairs)]
            self.proof.steps.append(Step(pid, "Argument filter processor", lines + [f"-> {sid}"], [sid]))
            return self.solve(after, sid, applied + 1, True)
        self.proof.steps.append(Step(pid, "Reduction pair processor",
                                     [f"no reduction pair with coefficients <= {self.config.max_coeff}"
                                      + (f" ({note})" if note else "")], data={"failed": True}))
        self.reason = f"no reduction pair for {pid}"
        return False


def build_problem(program: Program, spec: Optional[QuerySpec], config: Config) -> tuple[Trs, Trs, ArgumentFilter]:
    """Transformation plus filter refinement; returns (R_P, R', pi')."""
    if config.classical:
        moding = spec.derived_moding(program) if spec is not None else Moding()
        trs = transform_classical(program, moding)
        tuples = [p.lhs.sym for p in dependency_pairs(trs)] + [p.rhs.sym for p in dependency_pairs(trs)]
        return trs, trs, full_filter(list(trs.signature()) + tuples)
    trs = transform_new(program)
    types = infer_types(program)
    pi0 = spec.initial_filter(program) if spec is not None else full_filter(program.functions + program.predicates)
    if config.mode_splitting:
        refined, pi = refine_modesplit(trs, pi0, config.heuristic, types)
        return trs, refined, pi
    tuples = [p.lhs.sym for p in dependency_pairs(trs)] + [p.rhs.sym for p in dependency_pairs(trs)]
    pi = refine_basic(trs, extend_initial_filter(trs, pi0, tuples), config.heuristic, types)
    return trs, trs, pi


def prove(program: Program, spec: Optional[QuerySpec] = None, config: Config = Config()) -> Proof:
    """Try to prove termination of every query in the class ``spec``.

    The answer is TERMINATING with a proof, or UNKNOWN; failure to find a
    proof never claims non-termination.
    """
    start = time.monotonic()
    deadline = start + config.timeout
    trs, refined, pi = build_problem(program, spec, config)
    query = spec.describe() if spec is not None else "all arguments ground"
    proof = Proof(UNKNOWN, "", config, program, query, trs, refined, pi)
    pairs = dependency_pairs(refined)
    pi = pi.with_defaults({t.sym for p in pairs for t in (p.lhs, p.rhs)})
    proof.filter = pi
    solver = _Solver(proof, config, deadline)
    try:
        ok = solver.solve(DPProblem(tuple(pairs), refined.rules, pi), "P1", 0, False)
    except _Timeout:
        ok = False
        solver.reason = "timeout"
    proof.verdict = TERMINATING if ok else UNKNOWN
    proof.reason = "" if ok else solver.reason
    return proof
