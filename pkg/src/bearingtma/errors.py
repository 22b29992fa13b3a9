"""Exception hierarchy shared by all modules."""


class TMAError(Exception):
    """Base class for every error raised by bearingtma."""


class DomainError(TMAError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ShapeError(TMAError, ValueError):
    """Array lengths or time grids do not line up."""


class ConfigError(TMAError, ValueError):
    """A scenario or estimator configuration violates a constraint.

    ``field`` names the offending key so front ends can report it.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class DegenerateGeometryError(TMAError):
    """Observer and target (or predicted target) coincide."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class InsufficientDataError(TMAError):
    """Too few observations for the requested model order."""


class UnobservableGeometryError(TMAError):
    """The bearing design matrix is rank deficient or too ill conditioned."""

    def __init__(self, message, condition_number):
        super().__init__(message)
        self.condition_number = condition_number
