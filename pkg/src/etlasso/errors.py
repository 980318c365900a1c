"""Exception types raised across the package."""

from __future__ import annotations


class ETLassoError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(ETLassoError, ValueError):
    pass


class ZeroVarianceColumn(ETLassoError, ValueError):
    def __init__(self, index: int, name: str | None = None):
        self.index = index
        self.name = name
        label = repr(name) if name is not None else str(index)
        super().__init__(f"column {label} has zero variance")


class NonFiniteInput(ETLassoError, ValueError):
    pass


class InvalidGridSpec(ETLassoError, ValueError):
    pass


class InvalidPermutation(ETLassoError, ValueError):
    pass


class EmptyDesign(ETLassoError, ValueError):
    pass


class RankDeficient(ETLassoError, ValueError):
    def __init__(self, support):
        self.support = tuple(int(j) for j in support)
        super().__init__(f"design restricted to {list(self.support)} is rank deficient")


class InvalidRho(ETLassoError, ValueError):
    pass


class InvalidFoldCount(ETLassoError, ValueError):
    pass


class CholeskyFailure(ETLassoError, ArithmeticError):
    pass


class ConfigError(ETLassoError, ValueError):
    pass


class ParseError(ETLassoError, ValueError):
    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class NotConvergedWarning(RuntimeWarning):
    """Coordinate descent hit max_iter at some grid point."""
