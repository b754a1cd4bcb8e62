"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class EmptyPathError(DomainError):
    pass


class UnsupportedError(ValueError):
    """The operation is not defined for this input kind."""


class InsufficientDataError(ValueError):
    pass


class PathRangeError(IndexError):
    """A requested site index is not covered by the potential path."""


class ResonanceError(ArithmeticError):
    """The energy sits (numerically) on the spectrum of the finite-volume operator."""


class NoConvergenceError(ArithmeticError):
    pass


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending key or flag."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        where = []
        if field is not None:
            where.append(f"field '{field}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.field = field
        self.line = line
