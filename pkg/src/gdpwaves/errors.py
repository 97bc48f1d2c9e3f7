"""Error and warning types shared across the package."""


class GdpError(Exception):
    """Base class for all package-specific errors."""


class DegenerateParameters(GdpError):
    """Parameter combination makes the requested formula meaningless."""


class NoRoot(GdpError):
    """Self-consistency equation has no admissible root; no solitary wave."""


class InvalidAmplitude(GdpError):
    """Amplitude outside the admissible range for the requested construction."""


class SingularityError(GdpError):
    """First integral has a double zero at the turning point (algebraic decay)."""


class QuadratureFailure(GdpError):
    """Profile quadrature detected an invalid first-integral sign or lost accuracy."""


class NoPeakon(GdpError):
    """Structural constants admit no peakon; message carries the violated condition."""


class NonFinite(GdpError):
    """NaN/Inf encountered during time stepping; carries partial results if any."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ConfigError(GdpError):
    """Invalid simulation or scenario configuration."""


class TrackingLost(GdpError):
    """Peak tracking failed (maxima merged outside the interaction window)."""


class InsufficientTail(GdpError):
    """Profile tail too short for a reliable decay-rate fit."""


class DomainError(GdpError):
    """Function argument outside its mathematical domain."""


class ClassificationWarning(UserWarning):
    """Constructive classification disagrees with a closed-form existence bound."""
