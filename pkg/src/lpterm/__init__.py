"""Termination analysis of definite logic programs via term rewriting.

A program is turned into a TRS, an argument filter describing the queries
of interest is refined until the variable condition holds, and the
dependency pair framework for infinitary constructor rewriting is run on
the result.
"""

from .errors import LPTermError
from .parser import Moding, Program, QuerySpec, parse_file, parse_program, parse_query_spec
from .prover import TERMINATING, UNKNOWN, Config, Proof, prove

__all__ = [
    "Config", "LPTermError", "Moding", "Program", "Proof", "QuerySpec", "TERMINATING", "UNKNOWN",
    "parse_file", "parse_program", "parse_query_spec", "prove",
]
