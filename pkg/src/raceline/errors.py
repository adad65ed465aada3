"""Exception types shared across the raceline package."""

from __future__ import annotations

__all__ = [
    "RacelineError",
    "ParameterRangeError",
    "UnsupportedOrderError",
    "DegenerateParameterizationError",
    "FitError",
    "FitToleranceWarning",
    "TrackValidationError",
    "InfeasibleTrackError",
    "QpAssemblyError",
    "NoBottleneckError",
    "NumericalError",
]


class RacelineError(Exception):
    """Base class for errors raised by this package."""


class ParameterRangeError(RacelineError, ValueError):
    """A spline parameter lies outside the curve domain."""


class UnsupportedOrderError(RacelineError, ValueError):
    """A derivative order above the spline degree was requested."""


class DegenerateParameterizationError(RacelineError, ValueError):
    """The first-derivative norm is too small for a stable Frenet frame."""


class FitError(RacelineError, ValueError):
    """Least-squares spline fitting failed; message carries diagnostics."""


class FitToleranceWarning(UserWarning):
    """The fitted centerline deviates from a waypoint beyond the tolerance."""


class TrackValidationError(RacelineError, ValueError):
    """A track file or waypoint table violates the input contract."""


class InfeasibleTrackError(RacelineError, ValueError):
    """The corridor collapses (margin meets or exceeds a width) somewhere."""


class QpAssemblyError(RacelineError, ValueError):
    """The quadratic program could not be assembled from the inputs."""


class NoBottleneckError(RacelineError, ValueError):
    """No curvature bottleneck exists and no speed cap was provided."""


class NumericalError(RacelineError, RuntimeError):
    """An iterative numerical routine failed to converge."""
