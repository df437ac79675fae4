"""Exception hierarchy shared by the library and the command-line tool.

Each exception carries a short ``reason`` code (the first token of the
single-line message the CLI prints) and the process exit status it maps to.
"""


class PathLossError(Exception):
    reason = "error"
    exit_status = 1

    def __init__(self, message, reason=None):
        super().__init__(message)
        if reason is not None:
            self.reason = reason

    def oneline(self):
        text = " ".join(str(self).split())
        return f"{self.reason}: {text}"


class ValidationError(PathLossError, ValueError):
    """Bad input: malformed rows, inconsistent datasets, invalid parameters."""

    reason = "invalid"
    exit_status = 2


class DegenerateFitError(PathLossError, ValueError):
    """The estimator's normal equations have no unique solution."""

    reason = "degenerate"
    exit_status = 3


class DataIOError(PathLossError, OSError):
    reason = "io"
    exit_status = 4
