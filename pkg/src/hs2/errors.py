"""Exception types raised across the package."""


class HS2Error(Exception):
    """Base class for all library errors."""


class NonZeroMean(HS2Error, ValueError):
    """Input to the inverse of -d^2/dx^2 does not have zero mean."""


class OrientationLost(HS2Error, ValueError):
    """A circle map's slope dropped to (or below) the slope floor."""


class NewtonDivergence(HS2Error, RuntimeError):
    """Lift inversion failed to converge."""


class ChartViolation(HS2Error, ValueError):
    """A first component that must vanish at x = 0 does not."""


class DegenerateSpan(HS2Error, ValueError):
    """Two directions span a (numerically) degenerate plane."""


class NormalizationError(HS2Error, ValueError):
    """Initial data is not unit-normalized in the required convention."""


class BlowupReached(HS2Error, ValueError):
    """Requested time is at or beyond the maximal existence time."""


class CFLViolation(HS2Error, ValueError):
    """Time step exceeds the advective stability bound."""


class ConfigError(HS2Error, ValueError):
    """Malformed run configuration or field expression."""
