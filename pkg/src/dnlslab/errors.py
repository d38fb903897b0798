"""Exception hierarchy shared by all dnlslab modules."""


class DnlsError(Exception):
    """Base class for all package errors."""


class IndexOutOfRange(DnlsError):
    """A Fourier index is zero or outside the truncation window."""


class MeanNotZero(DnlsError):
    """A grid field carries a zero mode above the mean tolerance."""


class AliasingDetected(DnlsError):
    """Spectral content above the truncation exceeds the alias tolerance."""


class DomainError(DnlsError):
    """Argument outside the mathematical domain of the operation."""


class ZeroFrequency(DnlsError):
    """A frequency tuple contains a zero entry."""


class ComplexityBudget(DnlsError):
    """Direct (brute-force) evaluation requested beyond its cost limits."""


class StrideTooCoarse(DnlsError):
    """Finite-difference error dominates the quantity being certified."""


class TailTooLarge(DnlsError):
    """A truncation-tail certificate exceeds its tolerance."""


class BlowupSuspected(DnlsError):
    """Integration exceeded the overflow guard.

    Carries the partial trajectory (``.trajectory``) and the time at which
    the guard tripped (``.time``) when available.
    """

    def __init__(self, message, trajectory=None, time=None):
        super().__init__(message)
        self.trajectory = trajectory
        self.time = time


class NotContracting(DnlsError):
    """Fixed-point iteration failed to contract."""


class SmallnessViolated(DnlsError):
    """A smallness or time-horizon precondition failed without override."""


class GaugeSingular(DnlsError):
    """The gauge loop approaches the origin; inversion is ill-defined."""


class WindingNonzero(DnlsError):
    """The gauge loop has nonzero index but a mean-zero output was demanded."""


class GridTooCoarse(DnlsError):
    """Grid refinement failed to resolve argument increments of the loop."""


class QuadratureNotConverged(DnlsError):
    """Adaptive quadrature stalled before reaching the requested accuracy."""


class ConfigInvalid(DnlsError):
    """Run configuration failed schema validation.

    ``.diagnostics`` lists per-field messages.
    """

    def __init__(self, diagnostics):
        super().__init__("invalid configuration: " + "; ".join(diagnostics))
        self.diagnostics = list(diagnostics)
