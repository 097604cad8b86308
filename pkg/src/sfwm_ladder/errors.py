"""Exception types raised by the simulator."""


class SFWMError(Exception):
    pass


class NumericalError(SFWMError):
    """Base for failures of a numerical method (CLI exit code 3)."""


class SingularSystem(NumericalError):
    pass


class DegenerateDenominator(NumericalError):
    pass


class QuadratureNotConverged(NumericalError):
    def __init__(self, message, coarse=None, fine=None):
        super().__init__(message)
        self.coarse = coarse
        self.fine = fine


class GridTooCoarse(NumericalError):
    pass


class ZeroNoiseFloor(SFWMError):
    pass


class InsufficientStatistics(SFWMError):
    pass


class ConfigError(SFWMError):
    """Invalid configuration; ``field`` is the dotted key path, ``line`` the JSON line if known."""

    def __init__(self, message, field=None, line=None):
        self.message = message
        self.field = field
        self.line = line
        where = []
        if field:
            where.append(f"field '{field}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
