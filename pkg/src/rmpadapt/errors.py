"""Exception types shared across the package."""


class RmpAdaptError(Exception):
    """Base class for all package errors."""


class SingularPose(RmpAdaptError):
    """Chart evaluated at a pose where it is undefined (e.g. on the cylinder axis)."""


class DimensionMismatch(RmpAdaptError):
    """Operands disagree on manifold or configuration dimension."""


class EmptyList(RmpAdaptError):
    """Policy combination called with no policies."""


class NotSymmetric(RmpAdaptError):
    """Matrix expected to be symmetric is not, beyond tolerance."""


class BadParams(RmpAdaptError):
    """Policy or adaptation parameters outside their documented domain."""


class Diverged(RmpAdaptError):
    """Simulated robot exceeded the runaway speed fuse."""


class EmptyTrace(RmpAdaptError):
    """Metric requested over a trace with no records."""


class ConfigParse(RmpAdaptError):
    """Scenario configuration missing fields or failing validation."""

    def __init__(self, field: str, message: str = ""):
        self.field = field
        super().__init__(f"config field '{field}': {message}" if message else f"config field '{field}'")


class IoFailure(RmpAdaptError):
    """Trace or summary file could not be read or written."""


class MalformedFrame(RmpAdaptError):
    """Wire frame failed to decode or validate."""


class PortBusy(RmpAdaptError):
    """Requested service port is already bound."""


class ClientProtocolError(RmpAdaptError):
    """Client violated the session protocol (e.g. input from a non-operator)."""
