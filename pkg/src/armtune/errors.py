"""Exception hierarchy shared by all armtune modules."""


class ArmtuneError(Exception):
    """Base class for every error raised by this package."""


class InvalidConfig(ArmtuneError, ValueError):
    """A parameter or configuration value violates its invariant.

    ``field`` names the offending parameter when one can be singled out.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class NonFiniteInput(ArmtuneError, ValueError):
    """A dynamics evaluation received NaN or infinite input."""


class NonFiniteState(ArmtuneError, ArithmeticError):
    """An integration step produced a NaN or infinite derivative."""


class ConfigParseError(ArmtuneError):
    """Configuration text could not be parsed."""

    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.key = key


class ConfigValidationError(InvalidConfig):
    """A parsed configuration violates a model invariant."""
