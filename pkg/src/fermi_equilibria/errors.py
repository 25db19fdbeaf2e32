"""Exception hierarchy shared by every module of the package."""


class FermiEquilibriaError(Exception):
    """Base class for all errors raised by this package."""


class NonConvergence(FermiEquilibriaError):
    """An adaptive quadrature exhausted its subdivision budget."""


class InvalidDecayHint(FermiEquilibriaError, ValueError):
    pass


class BracketFailure(FermiEquilibriaError):
    """Bracket expansion could not enclose the requested target value."""


class InvalidDimension(FermiEquilibriaError, ValueError):
    pass


class DomainError(FermiEquilibriaError, ValueError):
    pass


class DimensionMismatch(FermiEquilibriaError, ValueError):
    pass


class InvalidDensity(FermiEquilibriaError, ValueError):
    """A density violates 0 <= f <= 1 or its structural invariants."""


class ZeroMass(FermiEquilibriaError):
    pass


class DegenerateProfile(FermiEquilibriaError):
    pass


class InfeasibleMoments(FermiEquilibriaError):
    """Moments fall below the lower bound that every admissible density obeys.

    Attributes:
        ratio: the normalized ratio ``M2 / M0**((n+2)/n)``.
        threshold: the dimension-dependent lower bound.
    """

    def __init__(self, message, ratio=None, threshold=None):
        super().__init__(message)
        self.ratio = ratio
        self.threshold = threshold


class InvalidMass(FermiEquilibriaError, ValueError):
    pass


class InfiniteDissipation(FermiEquilibriaError):
    """A sampled entropy-production term was infinite."""


class DegeneratePair(FermiEquilibriaError, ValueError):
    pass


class InvalidShape(FermiEquilibriaError, ValueError):
    pass
