"""Exception hierarchy.

Every error raised by the library derives from :class:`SteinChenError` so
callers (the CLI in particular) can separate input problems from bugs.
"""


class SteinChenError(Exception):
    pass


# sample spaces and lattice elements

class EmptySpaceError(SteinChenError, ValueError):
    pass


class DuplicateLabelError(SteinChenError, ValueError):
    pass


class NonpositiveMassError(SteinChenError, ValueError):
    pass


class MassExceedsOneError(SteinChenError, ValueError):
    pass


class SpaceMismatchError(SteinChenError, ValueError):
    pass


class BackendMismatchError(SteinChenError, TypeError):
    pass


class NegativeParameterError(SteinChenError, ValueError):
    pass


class TranscendentalOnRationalBackendError(SteinChenError, TypeError):
    pass


# conditional expectations

class InvalidPartitionError(SteinChenError, ValueError):
    pass


class FNotInRangeError(SteinChenError, ValueError):
    pass


class NegativeInputError(SteinChenError, ValueError):
    pass


class NotAComponentError(SteinChenError, ValueError):
    pass


class TooManyComponentsError(SteinChenError, ValueError):
    pass


class NotIntegerValuedError(SteinChenError, ValueError):
    pass


# Poisson measure and Stein solution

class NegativeIndexError(SteinChenError, ValueError):
    pass


class NegativeKError(SteinChenError, ValueError):
    pass


class JTooLargeError(SteinChenError, ValueError):
    pass


class BadIndicesError(SteinChenError, ValueError):
    pass


class SetsNotDisjointError(SteinChenError, ValueError):
    pass


# laws of small numbers

class EmptyFamilyError(SteinChenError, ValueError):
    pass


class BadIndexError(SteinChenError, IndexError):
    pass


class TooLargeError(SteinChenError, ValueError):
    pass


class BadProbabilityError(SteinChenError, ValueError):
    pass


class NotIndependentError(SteinChenError):
    """The family failed the conditional independence test.

    The partially filled report is attached as ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NotConvergedError(SteinChenError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# model files and CLI

class ParseError(SteinChenError, ValueError):
    pass


class ValidationError(SteinChenError, ValueError):
    """A model file parsed but violates an invariant.

    ``field`` names the offending entry (e.g. ``"weights"``) and
    ``invariant`` the rule that failed.
    """

    def __init__(self, message, field=None, invariant=None):
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field
        self.invariant = invariant


class BadExampleError(SteinChenError, ValueError):
    pass


class GridEmptyError(SteinChenError, ValueError):
    pass
