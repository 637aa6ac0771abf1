"""Exception hierarchy shared by all octagasket modules."""


class OctagasketError(Exception):
    """Base class for every error raised by this package."""


class EmptyAddress(OctagasketError, ValueError):
    pass


class LevelTooLarge(OctagasketError, ValueError):
    pass


class IndexOutOfRange(OctagasketError, IndexError):
    pass


class InvalidEntry(OctagasketError, ValueError):
    pass


class DegreeViolation(OctagasketError):
    """A cell ended up with total edge multiplicity other than 8."""


class UnmatchedSide(OctagasketError):
    pass


class AmbiguousMatch(OctagasketError):
    pass


class ConvergenceFailure(OctagasketError):
    pass


class DimensionTooLarge(OctagasketError, ValueError):
    pass


class PartialSpectrum(OctagasketError, ValueError):
    pass


class PartialBasis(OctagasketError, ValueError):
    pass


class InsufficientData(OctagasketError, ValueError):
    pass


class NotSymmetric(OctagasketError):
    """Eigenvector is not mapped to +-itself by a group element."""


class DegenerateRange(OctagasketError, ValueError):
    pass


class BadInitSpec(OctagasketError, ValueError):
    pass
