"""Exception types raised across the package."""


class QSchottkyError(Exception):
    """Base class for all package errors."""


class DimensionError(QSchottkyError):
    """Operator shapes or factor dimensions do not match."""


class HermiticityError(QSchottkyError):
    """Matrix deviates from its conjugate transpose beyond tolerance."""


class NotPositiveSemidefiniteError(QSchottkyError):
    """An eigenvalue is negative beyond the PSD tolerance."""


class FrameError(QSchottkyError):
    """Frame is not orthonormal/complete beyond repairable drift."""


class InvalidRateError(QSchottkyError):
    """Weight-rate vector does not sum to zero."""


class InvalidTemperatureError(QSchottkyError):
    """A temperature argument is nonpositive or a fit produced one."""


class UndefinedTemperatureError(QSchottkyError):
    """Contact temperature is undefined for the given exchange rates."""


class ZeroHeatExchangeError(UndefinedTemperatureError):
    """Heat exchange (numerator of the temperature ratio) vanishes."""


class ZeroEntropyExchangeError(UndefinedTemperatureError):
    """Entropy exchange (denominator of the temperature ratio) vanishes."""


class UnreachableExchangeError(QSchottkyError):
    """No exchange-rate direction can realize the requested heat flow."""


class ConstraintViolationError(QSchottkyError):
    """Two routes to the same thermodynamic quantity disagree."""


class ScenarioError(QSchottkyError):
    """Scenario file is malformed; carries a field path when available."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class StepSizeError(QSchottkyError):
    """Integrator step rejected (positivity damping budget exceeded)."""


class RootBracketError(QSchottkyError):
    """Root finder bracket does not enclose a sign change."""
