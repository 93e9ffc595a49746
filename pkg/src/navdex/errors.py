"""Exception hierarchy.

Every error raised on a contract violation derives from :class:`NavdexError`,
which is a ``ValueError`` so callers that only care about bad input can catch
that.
"""


class NavdexError(ValueError):
    """Base class for all validation errors raised by navdex."""


# ingestion
class MalformedCsv(NavdexError):
    pass


class NonFiniteSample(NavdexError):
    pass


class LengthMismatch(NavdexError):
    pass


class UnknownSubscale(NavdexError):
    pass


class DuplicateSubject(NavdexError):
    pass


class MissingValue(NavdexError):
    pass


# signal processing / features
class TooShort(NavdexError):
    pass


class InvalidCutoff(NavdexError):
    pass


class EvenKernel(NavdexError):
    pass


class OrderTooHigh(NavdexError):
    pass


class DegenerateSignal(NavdexError):
    """A feature is undefined for the given signal (e.g. zero variance)."""

    def __init__(self, message, keys=()):
        super().__init__(message)
        self.keys = tuple(keys)


# derivation / scoring
class InsufficientSubjects(NavdexError):
    pass


class ConstantTarget(NavdexError):
    pass


class MissingFeature(NavdexError, KeyError):
    def __str__(self):
        return ValueError.__str__(self)


# metrics
class ZeroActualForMape(NavdexError):
    pass


class ConstantActualForR2(NavdexError):
    pass


class ConstantVector(NavdexError):
    pass


class SubjectMismatch(NavdexError):
    pass


# synth / report
class OverconstrainedPlacement(NavdexError):
    pass


class EmptyInput(NavdexError):
    pass
