"""Exception types shared across the package."""


class SephierError(Exception):
    pass


class NotHermitian(SephierError):
    pass


class RankMismatch(SephierError):
    pass


class DimensionMismatch(SephierError):
    pass


class NotHomogeneous(SephierError):
    pass


class OddDegree(SephierError):
    pass


class NotOnSphere(SephierError):
    pass


class CapExceeded(SephierError):
    """Raised when a Groebner computation would exceed the degree cap."""

    def __init__(self, degree, cap):
        super().__init__(f"degree {degree} exceeds cap {cap}")
        self.degree = degree
        self.cap = cap


class SizeOverflow(SephierError):
    pass


class TooManyVariables(SephierError):
    pass


class ShapeMismatch(SephierError):
    pass


class DualInfeasible(SephierError):
    pass


class InconsistentConstraints(SephierError):
    pass


class SolverFailure(SephierError):
    pass


class InputError(SephierError):
    """Malformed or inconsistent input file."""
