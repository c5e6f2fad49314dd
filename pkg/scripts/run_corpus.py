"""Run the prover over a directory of programs under several settings.

    python scripts/run_corpus.py [DIR] [--max-coeff N] [--timeout S] [--repeat]

Prints one verdict table per setting.  With --repeat every proof is
computed twice and compared byte for byte.
"""

import argparse
import sys
import time
from pathlib import Path

from lpterm import Config, LPTermError, parse_file, prove
from lpterm.prover import HEURISTICS

ROOT = Path(__file__).resolve().parent.parent


def settings(max_coeff: int, timeout: float) -> list[tuple[str, Config]]:
    out = [(f"{h}, mode-splitting on", Config(heuristic=h, max_coeff=max_coeff, timeout=timeout)) for h in HEURISTICS]
    out.append(("tb2, mode-splitting off", Config(mode_splitting=False, max_coeff=max_coeff, timeout=timeout)))
    out.append(("classical", Config(classical=True, max_coeff=max_coeff, timeout=timeout)))
    return out


def run_one(path: Path, config: Config) -> tuple[str, float, str]:
    start = time.monotonic()
    try:
        program, spec = parse_file(path)
        proof = prove(program, spec, config)
        verdict, text = proof.verdict, proof.text()
    except LPTermError as e:
        verdict, text = type(e).__name__, str(e)
    return verdict, time.monotonic() - start, text


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("directory", nargs="?", default=str(ROOT / "programs"))
    ap.add_argument("--max-coeff", type=int, default=2)
    ap.add_argument("--timeout", type=float, default=60.0)
    ap.add_argument("--repeat", action="store_true", help="check that proofs are reproducible")
    args = ap.parse_args()
    files = sorted(Path(args.directory).glob("*.pl"))
    names = [f.stem for f in files]
    width = max(len(n) for n in names) if names else 4
    differing = 0
    for title, config in settings(args.max_coeff, args.timeout):
        print(f"== {title}, max-coeff {args.max_coeff}")
        for f in files:
            verdict, secs, text = run_one(f, config)
            if args.repeat and run_one(f, config)[2] != text:
                differing += 1
                verdict += " (NOT REPRODUCIBLE)"
            print(f"  {f.stem:<{width}}  {verdict:<13} {secs:6.2f}s")
    if args.repeat:
        print(f"non-reproducible proofs: {differing}")
    return 1 if differing else 0


if __name__ == "__main__":
    sys.exit(main())
