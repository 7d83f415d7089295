"""Exception hierarchy shared by all qbound modules."""


class QboundError(Exception):
    """Base class for every error raised by qbound."""


class NonHermitianInput(QboundError, ValueError):
    pass


class HermiticityViolation(NonHermitianInput):
    pass


class NonHermitianOperator(NonHermitianInput):
    pass


class DimensionTooLarge(QboundError, ValueError):
    pass


class DimensionMismatch(QboundError, ValueError):
    pass


class LinearlyDependent(QboundError, ValueError):
    pass


class NotPrime(QboundError, ValueError):
    pass


class NotUnit(QboundError, ValueError):
    pass


class NonRealMoment(QboundError, ValueError):
    pass


class NonRealExpectation(QboundError, ValueError):
    pass


class MissingLabel(QboundError, KeyError):
    pass


class NotNormalized(QboundError, ValueError):
    pass


class AngleOutOfRange(QboundError, ValueError):
    pass


class DegenerateSpectrum(QboundError, ValueError):
    pass


class InvalidKappa(QboundError, ValueError):
    pass


class DegenerateOverlap(QboundError, ValueError):
    pass


class TooManyOperators(QboundError, ValueError):
    pass


class UnknownBound(QboundError, KeyError):
    pass


class ArityMismatch(QboundError, ValueError):
    pass


class ParseError(QboundError, ValueError):
    """Malformed matrix or point input; carries the 1-based location."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)
