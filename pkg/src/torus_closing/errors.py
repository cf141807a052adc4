"""Exception types raised across the package."""


class TorusClosingError(Exception):
    """Base class for all package errors."""


class MapFileError(TorusClosingError, ValueError):
    """Malformed map description, with a 1-based line/column position."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class PathOutsideDisk(TorusClosingError, ValueError):
    pass


class NotDiskSupported(TorusClosingError, ValueError):
    pass


class DiskTooLarge(TorusClosingError, ValueError):
    pass


class TargetUnreachable(TorusClosingError, RuntimeError):
    pass


class DisjointnessFailed(TorusClosingError, RuntimeError):
    pass


class NoOrbitFound(TorusClosingError, RuntimeError):
    """Raised only on request; carries the full scan report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
