"""Exception hierarchy.

Configuration problems map to CLI exit code 1, numerical failures to
exit code 2; see cli.main.
"""


class NlspecError(Exception):
    """Base class for all package errors."""


class ConfigError(NlspecError):
    """Malformed or incomplete run configuration."""


ConfigParse = ConfigError


class CacheCorrupt(NlspecError):
    """Cache entry fails its digest check."""


class NumericalError(NlspecError):
    """Base class for numerical failures (CLI exit code 2)."""


class NonConvexSymbol(NumericalError):
    """Midpoint convexity check failed; Legendre transform undefined."""


class CoincidentPoints(NumericalError):
    """Jump kernel evaluated on the diagonal x = y."""


class DivergentTail(NumericalError):
    """Kernel tail mass estimate does not converge."""


class EmptyCriterion(NumericalError):
    """No s in the search window satisfies the rate criterion."""


class DivergentRate(NumericalError):
    """Fitted tail of the rate function is not integrable."""


class InadmissibleDelta(NumericalError):
    """delta outside the admissible window of the variable-order bound."""


class WindowTooNarrow(NumericalError):
    """Maximizing t of the trace bound sits on the window boundary."""


class BandwidthExceeded(NumericalError):
    """Kernel range / mesh width exceeds the assembly bandwidth cap."""


class UnsupportedDimension(NumericalError):
    """Requested dimension outside the supported range."""


class NoConvergence(NumericalError):
    """Iterative eigensolver failed to converge."""


class BreakdownDetected(NumericalError):
    """Repeated Lanczos breakdown after reseeding."""


class DimensionTooLarge(NumericalError):
    """Dense eigensolve requested beyond the dense size limit."""


class QuadratureNotConverged(NumericalError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class WindowTooSmall(NumericalError):
    """Fit window contains too few points."""
