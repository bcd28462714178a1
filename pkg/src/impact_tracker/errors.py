"""Exception types shared across the toolkit."""


class ImpactTrackerError(Exception):
    """Base class for all toolkit errors."""


# --- log file errors ---

class IoFailure(ImpactTrackerError):
    pass


class NoHeader(ImpactTrackerError):
    pass


class ParseFailure(ImpactTrackerError):
    def __init__(self, message, line_number=None):
        super().__init__(message)
        self.line_number = line_number


class MonotonicityViolation(ImpactTrackerError):
    pass


# --- sensor errors ---

class RangeViolation(ImpactTrackerError):
    pass


class ProcessGone(ImpactTrackerError):
    pass


class ClockSkew(ImpactTrackerError):
    pass


class TraceExhausted(ImpactTrackerError):
    pass


# --- attribution errors ---

class NegativeInterval(ImpactTrackerError):
    pass


# --- carbon / region errors ---

class DegeneratePolygon(ImpactTrackerError):
    pass


class NoRegion(ImpactTrackerError):
    pass


class GeolocationUnavailable(ImpactTrackerError):
    pass


class UnknownCountry(ImpactTrackerError):
    pass


class ProviderUnavailable(ImpactTrackerError):
    pass


# --- monitor / reporting errors ---

class LaunchFailure(ImpactTrackerError):
    pass


class UnknownGpuModel(ImpactTrackerError):
    pass


class EmptyInput(ImpactTrackerError):
    pass
