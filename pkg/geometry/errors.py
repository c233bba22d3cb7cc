"""Exception hierarchy shared by the geometry engines and the CLI."""


class CubicError(ValueError):
    """Base class for every error raised by the geometry engines"""

    exit_code = 2


class SpecFormatError(CubicError):
    """Malformed cubic, point or corpus document"""


class DimensionMismatchError(CubicError):
    """Vector length does not match the number of variables"""


class DegenerateLineError(CubicError):
    """Two generators of a line are proportional"""


class CoincidentPointsError(DegenerateLineError):
    """Two projective points that should differ are equal"""


class NotOnCubicError(CubicError):
    """Point is not on the hypersurface"""


class SingularPointError(CubicError):
    """Gradient vanishes at the point"""


class IndeterminateError(CubicError):
    """The third-point map is undefined (the line lies in X)"""

    exit_code = 3


class IdenticallyZeroError(CubicError):
    """Restriction of the cubic to a line is the zero polynomial"""

    exit_code = 4


class SolverDegeneracyError(CubicError):
    """Root finding or elimination stayed degenerate after all retries"""

    exit_code = 4


class UseSpanningLinesError(SolverDegeneracyError):
    """Lines through a point are only enumerable for cubic threefolds"""


class EckardtCenterError(SolverDegeneracyError):
    """Infinitely many lines pass through the point"""


class ResampleLimitError(CubicError):
    """A seeded resampling loop ran out of attempts"""

    exit_code = 5


class RankDeficiencyError(CubicError):
    """Orbit tangents failed to span the tangent space"""

    exit_code = 6

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}


class InsufficientSamplesError(CubicError):
    """Too few orbit samples to test a conic"""


class GeometryInvariantError(CubicError):
    """An internal identity between incidence predicates failed"""

    exit_code = 1
