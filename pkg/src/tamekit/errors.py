"""Exception types shared by every module.

The CLI maps :class:`PreconditionError` to exit code 1 and
:class:`ConsistencyError` to exit code 2.
"""


class TamekitError(Exception):
    reason = "error"


class PreconditionError(TamekitError, ValueError):
    """Input violates a documented precondition."""

    reason = "precondition"


class ConsistencyError(TamekitError):
    """Two independent routes to the same quantity disagree."""

    reason = "internal-consistency"
