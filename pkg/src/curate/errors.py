"""Exception hierarchy. Everything raised on bad input derives from CurateError,
which the CLI maps to exit code 1; anything else is an internal error (exit 2).
"""


class CurateError(Exception):
    """Base class for input and validation failures."""


class ValidationError(CurateError):
    """A domain invariant does not hold (bad record, bad pool, bad recipe)."""


class FormatError(CurateError):
    """A file does not conform to the pool/manifest/sidecar formats."""


class OperationError(CurateError):
    """An operation was invoked on inputs it cannot process
    (missing score, empty candidate set, dimension mismatch, ...)."""


class UsageError(CurateError):
    """Bad command-line invocation."""
