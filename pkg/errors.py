"""
Exception hierarchy for cykit.

Every error carries the data needed to explain it and an ``exit_code`` that
the command-line driver uses verbatim.
"""


class CykitError(Exception):
    """Base class for all cykit errors."""
    exit_code = 2


class PresentationError(CykitError):
    """A presentation is malformed or inconsistent."""

    def __init__(self, reason, item=None):
        self.reason = reason
        self.item = item
        where = f" (at {item})" if item is not None else ""
        super().__init__(f"Invalid presentation{where}: {reason}")


class CompileError(CykitError):
    """A presentation cannot be compiled to a finite model."""

    def __init__(self, reason, presentation_name=None):
        self.reason = reason
        self.presentation_name = presentation_name
        name = f" {presentation_name!r}" if presentation_name else ""
        super().__init__(f"Cannot compile presentation{name}: {reason}")


class IntegrityError(CykitError):
    """An exact identity (d∘d = 0, chain-map square, ...) failed."""

    def __init__(self, what, degree=None):
        self.what = what
        self.degree = degree
        where = f" in degree {degree}" if degree is not None else ""
        super().__init__(f"Integrity check failed{where}: {what}")


class SchemaError(CykitError):
    """A JSON document does not match schema 1."""

    def __init__(self, path, reason):
        self.path = path
        self.reason = reason
        super().__init__(f"Schema error at {path}: {reason}")


class RefusalError(CykitError):
    """An operation refuses its input because a precondition fails."""

    def __init__(self, operation, reason):
        self.operation = operation
        self.reason = reason
        super().__init__(f"{operation} refused: {reason}")


class MismatchError(RefusalError):
    """Boundary classes or a witness chain do not match; a definite failure."""
    exit_code = 1


class WindowError(CykitError):
    """The requested window is too small for a conclusive answer."""
    exit_code = 3

    def __init__(self, reason):
        self.reason = reason
        super().__init__(f"Inconclusive window: {reason}")


class ObstructionError(CykitError):
    """Order-by-order lifting hit an inconsistent system."""
    exit_code = 1

    def __init__(self, order):
        self.order = order
        super().__init__(f"lifting obstructed at order {order}")
