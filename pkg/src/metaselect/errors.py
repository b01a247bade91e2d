"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class MetaSelectError(Exception):
    """Base class for every error raised by this package."""


class DataError(MetaSelectError):
    """Input data is malformed or inconsistent."""


class ArffError(DataError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedHeader(ArffError):
    pass


class ArityMismatch(ArffError):
    pass


class BadNumeric(ArffError):
    pass


class MissingFile(DataError):
    pass


class UnknownInstance(DataError):
    pass


class NoCutoff(DataError):
    pass


class IoFailure(MetaSelectError):
    pass


class DegenerateInput(MetaSelectError):
    pass


class DimensionMismatch(MetaSelectError):
    pass


class EmptyMatrix(MetaSelectError):
    pass


class UnknownRun(DataError):
    pass


class UnknownSelector(MetaSelectError):
    pass


class DegenerateGap(MetaSelectError):
    """Oracle and SBS coincide, so nPAR10 is undefined."""


class TooFewInstances(MetaSelectError):
    pass


class KeyMismatch(MetaSelectError):
    pass


class InvalidConfig(MetaSelectError):
    pass
