"""Exception hierarchy shared by every module in the package."""


class ManifoldApproxError(Exception):
    """Base class for all package errors."""


class OutsideTubularNeighborhood(ManifoldApproxError, ValueError):
    """The point is at or beyond the reach, so the projection is not unique."""


class NonConvergence(ManifoldApproxError, RuntimeError):
    pass


class PointNotOnManifold(ManifoldApproxError, ValueError):
    pass


class NotANormalVector(ManifoldApproxError, ValueError):
    pass


class NotTangent(ManifoldApproxError, ValueError):
    pass


class NotUnit(ManifoldApproxError, ValueError):
    pass


class SingularOperator(ManifoldApproxError, ArithmeticError):
    """``I - B_v`` is numerically singular (the point sits near the reach)."""


class DegenerateSpectrum(OutsideTubularNeighborhood):
    pass


class RankDeficient(OutsideTubularNeighborhood):
    pass


class InsufficientSamples(ManifoldApproxError, ValueError):
    pass


class DimensionMismatch(ManifoldApproxError, ValueError):
    pass


class EpsilonExceedsReach(ManifoldApproxError, ValueError):
    pass


class AllMasked(ManifoldApproxError, ValueError):
    pass


class MalformedRow(ManifoldApproxError, ValueError):
    pass


class NonRectangular(ManifoldApproxError, ValueError):
    pass


class ProjectionFailed(ManifoldApproxError, RuntimeError):
    pass


class IllConditionedPullback(ManifoldApproxError, ArithmeticError):
    pass


class MaskedNeighbor(ManifoldApproxError, ValueError):
    pass


class AmbiguousLog(ManifoldApproxError, ValueError):
    pass


class InvalidGroup(ManifoldApproxError, ValueError):
    pass
