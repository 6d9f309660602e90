"""
Exception hierarchy shared by every package.

All errors derive from ValueError so callers that already guard numeric
input with ``except ValueError`` keep working.
"""


class OneBitRadarError(ValueError):
    """Base class for all library errors."""


class DomainError(OneBitRadarError):
    """Argument outside the mathematical domain of a function."""


class DegenerateCoefficientError(OneBitRadarError):
    """Leading polynomial coefficient is zero."""


class BracketError(OneBitRadarError):
    """Root-finding interval does not bracket a sign change."""


class NotPositiveDefiniteError(OneBitRadarError):
    """Cholesky factorization failed."""


class AsymmetryError(OneBitRadarError):
    """Matrix is not symmetric/Hermitian within tolerance."""


class DimensionMismatchError(OneBitRadarError):
    pass


class AngleOutOfRangeError(OneBitRadarError):
    pass


class InvalidSceneError(OneBitRadarError):
    """Scene, geometry, target or interference description is invalid."""


class InvalidWaveformError(OneBitRadarError):
    pass


class ZeroFilterError(OneBitRadarError):
    pass


class NonFiniteFilterError(OneBitRadarError):
    """Filter has a nan or infinite entry."""


class DegenerateTargetResponseError(OneBitRadarError):
    """A(theta0) s vanishes, so no distortionless filter exists."""


class EtaUndefinedError(OneBitRadarError):
    pass


class DegenerateProjectionError(OneBitRadarError):
    """t-update projection g is zero and no previous iterate is available."""


class RankViolationError(OneBitRadarError):
    pass


class ExperimentError(OneBitRadarError):
    """Bad experiment request coming from the command line."""
