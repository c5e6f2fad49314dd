"""Command-line interface.

    lpterm [prove] PATH [options]     prove termination of a file or a directory
    lpterm check PATH [options]       cross-check a file against the SLD oracle

Exit status for a single file: 0 TERMINATING, 1 UNKNOWN, 2 error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from .errors import LPTermError
from .oracles import (
    DEPTH_EXCEEDED, SUCCESS, CyclicAnswer, check_rewrite_step, goal_terms, sample_queries,
    simulate_success, sld_derive,
)
from .parser import parse_file
from .prover import HEURISTICS, PROOF_FORMATS, TERMINATING, Config, build_problem, prove
from .terms import is_ground
from .transform import transform_new

EXIT_TERMINATING = 0
EXIT_UNKNOWN = 1
EXIT_ERROR = 2

PROGRAM_SUFFIXES = (".pl", ".pro", ".prolog")


def _on_off(text: str) -> bool:
    if text.lower() in ("on", "yes", "true", "1"):
        return True
    if text.lower() in ("off", "no", "false", "0"):
        return False
    raise argparse.ArgumentTypeError("expected on or off")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--heuristic", choices=HEURISTICS, help="refinement heuristic (default tb2)")
    p.add_argument("--mode-splitting", type=_on_off, metavar="{on,off}",
                   help="create labelled predicate copies while refining (default on)")
    p.add_argument("--max-coeff", type=int, help="largest coefficient of interpretations, 1..5 (default 2)")
    p.add_argument("--timeout", type=float, help="seconds per program (default 60)")
    p.add_argument("--classical", action="store_true", default=None,
                   help="use the classical transformation for well-moded programs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpterm", description="Termination prover for definite logic programs.")
    sub = parser.add_subparsers(dest="command")
    prove_p = sub.add_parser("prove", help="prove termination (default command)")
    prove_p.add_argument("path", help="program file, or a directory of programs")
    _add_config_flags(prove_p)
    prove_p.add_argument("--proof-format", choices=PROOF_FORMATS, help="proof output format (default text)")
    prove_p.add_argument("--emit-trs", action="store_true", default=None,
                         help="print the analysed TRS, one 'l -> r' rule per line, and stop")
    check_p = sub.add_parser("check", help="compare the verdict with bounded SLD resolution")
    check_p.add_argument("path", help="program file")
    _add_config_flags(check_p)
    check_p.add_argument("--samples", type=int, default=50, help="number of sampled queries")
    check_p.add_argument("--seed", type=int, default=0)
    check_p.add_argument("--depth-bound", type=int, default=10_000)
    check_p.add_argument("--node-limit", type=int, default=200_000, help="resolution attempts per query")
    check_p.add_argument("--term-depth", type=int, default=4, help="depth of sampled query arguments")
    return parser


def config_from_args(args: argparse.Namespace, environ: Optional[dict] = None) -> Config:
    """Defaults, then LPTERM_* environment variables, then explicit flags."""
    config = Config().with_env(environ)
    changes = {}
    for name in ("heuristic", "mode_splitting", "max_coeff", "timeout", "classical", "proof_format", "emit_trs"):
        value = getattr(args, name, None)
        if value is not None:
            changes[name] = value
    return replace(config, **changes)


def _program_files(path: Path) -> list[Path]:
    return sorted(p for p in path.iterdir() if p.is_file() and p.suffix in PROGRAM_SUFFIXES)


def prove_file(path: Path, config: Config, out=None) -> int:
    out = out or sys.stdout
    program, spec = parse_file(path)
    if config.emit_trs:
        _, refined, _ = build_problem(program, spec, config)
        for r in refined:
            print(r, file=out)
        return EXIT_TERMINATING
    proof = prove(program, spec, config)
    if config.proof_format == "json":
        print(json.dumps({"file": str(path), **proof.to_json()}, sort_keys=True), file=out)
    else:
        out.write(proof.text())
    return EXIT_TERMINATING if proof.verdict == TERMINATING else EXIT_UNKNOWN


def prove_directory(path: Path, config: Config, out=None) -> int:
    out = out or sys.stdout
    files = _program_files(path)
    counts = {"Successes": 0, "Failures": 0, "Timeouts": 0}
    rows = []
    for f in files:
        start = time.monotonic()
        reason = ""
        try:
            program, spec = parse_file(f)
            proof = prove(program, spec, config)
            verdict, reason = proof.verdict, proof.reason
        except (LPTermError, ValueError, OSError) as e:
            verdict, reason = "ERROR", f"{type(e).__name__}: {e}"
        elapsed = time.monotonic() - start
        if verdict == TERMINATING:
            counts["Successes"] += 1
        elif reason == "timeout":
            counts["Timeouts"] += 1
        else:
            counts["Failures"] += 1
        rows.append((f.name, verdict, elapsed, reason))
    if config.proof_format == "json":
        for name, verdict, elapsed, reason in rows:
            print(json.dumps({"file": name, "verdict": verdict, "reason": reason, "seconds": round(elapsed, 2)},
                             sort_keys=True), file=out)
        print(json.dumps({"summary": counts}, sort_keys=True), file=out)
    else:
        width = max([len(r[0]) for r in rows] + [4])
        print(f"{'file':<{width}}  {'verdict':<11}  {'time':>7}", file=out)
        for name, verdict, elapsed, reason in rows:
            note = f"  ({reason})" if reason else ""
            print(f"{name:<{width}}  {verdict:<11}  {elapsed:6.2f}s{note}", file=out)
        print(file=out)
        print("  ".join(f"{k}: {v}" for k, v in counts.items()), file=out)
    return EXIT_TERMINATING if counts["Successes"] == len(rows) else EXIT_UNKNOWN


def check_file(path: Path, config: Config, args: argparse.Namespace, out=None) -> int:
    """Sample queries from the class, run them with bounded SLD resolution
    and, for ground successes, replay them as rewrite sequences."""
    out = out or sys.stdout
    program, spec = parse_file(path)
    proof = prove(program, spec, config)
    trs = list(transform_new(program))
    queries = sample_queries(program, spec, args.samples, args.seed, args.term_depth)
    tally = {"success": 0, "failure": 0, "depth-exceeded": 0, "truncated": 0}
    replayed = bad_replays = 0
    for q in queries:
        trace = sld_derive(program, [q], args.depth_bound, exhaust=True, max_nodes=args.node_limit)
        tally["truncated" if trace.truncated else trace.outcome] += 1
        print(f"{trace.outcome:<14} {'(truncated) ' if trace.truncated else ''}{q}", file=out)
        if trace.outcome == SUCCESS and not trace.truncated and is_ground(q):
            first = sld_derive(program, [q], args.depth_bound, max_nodes=args.node_limit)
            try:
                seq = simulate_success(program, first, trs)
                start, end = goal_terms(q, first.bindings)
            except CyclicAnswer:
                continue
            replayed += 1
            ok = (seq[0] == start and seq[-1] == end and len(seq) - 1 >= first.length
                  and all(check_rewrite_step(trs, s, t) for s, t in zip(seq, seq[1:])))
            bad_replays += not ok
    print(file=out)
    print(f"prover: {proof.verdict}" + (f" ({proof.reason})" if proof.reason else ""), file=out)
    print("  ".join(f"{k}: {v}" for k, v in tally.items()), file=out)
    print(f"rewrite replays: {replayed} checked, {bad_replays} failed", file=out)
    mismatch = proof.verdict == TERMINATING and tally[DEPTH_EXCEEDED] > 0
    if mismatch:
        print("MISMATCH: a query of a class proved terminating exceeded the depth bound", file=out)
    return EXIT_UNKNOWN if mismatch or bad_replays else EXIT_TERMINATING


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] not in ("prove", "check", "-h", "--help"):
        argv.insert(0, "prove")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_ERROR
    try:
        config = config_from_args(args)
        path = Path(args.path)
        if args.command == "check":
            return check_file(path, config, args)
        if path.is_dir():
            return prove_directory(path, config)
        return prove_file(path, config)
    except (LPTermError, ValueError, OSError) as e:
        print(f"lpterm: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
