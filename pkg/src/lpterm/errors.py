"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class LPTermError(Exception):
    """Base class for every error raised by the prover."""


class UnmappedSymbol(LPTermError):
    def __init__(self, symbol: object):
        super().__init__(f"argument filter has no entry for {symbol}")
        self.symbol = symbol


class NoUnifier(LPTermError):
    pass


class LPSyntaxError(LPTermError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class UnsupportedFeature(LPTermError):
    pass


class UnknownSymbol(LPTermError):
    pass


class NotWellModed(LPTermError):
    def __init__(self, witness: str):
        super().__init__(f"program is not well-moded: {witness}")
        self.witness = witness


class NoOrder(LPTermError):
    pass


class NoChoice(LPTermError):
    pass
