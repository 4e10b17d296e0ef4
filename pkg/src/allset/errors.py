"""Exception types shared across the package."""


class AllsetError(Exception):
    """Base class for all errors raised by this package."""


class InputError(AllsetError, ValueError):
    """Malformed input: wrong shape, non-finite entries, bad indices, bad files."""


class ParameterError(AllsetError, ValueError):
    """A numeric parameter is outside its admissible range."""


class NotATreeMetric(InputError):
    """The four-point condition fails; ``quadruple`` is the first failing one."""

    def __init__(self, quadruple, message=None):
        self.quadruple = tuple(quadruple)
        super().__init__(message or f"four-point condition fails at quadruple {self.quadruple}")


class ValenceExhausted(AllsetError):
    """A vertex would exceed its valence budget.

    Raised by the extension engine; it signals a broken invariant and is
    never repaired silently.
    """
