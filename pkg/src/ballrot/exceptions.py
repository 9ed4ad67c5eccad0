"""Exception types shared across the package."""


class BallrotError(Exception):
    """Base class for all package errors."""


class DomainError(BallrotError, ValueError):
    """An argument lies outside the supported domain of a function."""


class BracketError(BallrotError, RuntimeError):
    """A root bracket could not be established or a zero failed certification."""


class GridMismatchError(BallrotError, ValueError):
    """Two field sample sets live on different grids."""


class FamilyMismatchError(BallrotError, ValueError):
    """An operator was applied to coefficients of the wrong mode family."""


class IllPosedError(BallrotError, ValueError):
    """The requested problem is rejected outright (e.g. zero shift parameter)."""


class FormatError(BallrotError, ValueError):
    """A document could not be parsed or failed schema validation."""


class ChecksumError(FormatError):
    """A cached table failed its integrity check."""
