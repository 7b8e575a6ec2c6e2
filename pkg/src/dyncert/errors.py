"""Exception types shared across the library."""


class DyncertError(Exception):
    """Base class for all library errors."""


class DomainError(DyncertError, ValueError):
    """An argument lies outside the mathematically allowed domain."""


class ConvergenceError(DyncertError, RuntimeError):
    """An iterative routine failed to reach its tolerance.

    The best residual (or error estimate) achieved is attached so callers
    can decide whether the partial result is still usable.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class EmptyWindowError(DyncertError, ValueError):
    """Energy-window constraints left no admissible energies."""


class EmptySliceError(DyncertError, ValueError):
    """No energy level falls inside the requested window."""


class LibrationError(DomainError):
    """Pendulum energy at or above the separatrix (librating trajectory)."""


class UnsupportedTauError(DomainError):
    """Probing ratio outside the model's admissible range."""


class NumericalInstabilityError(DyncertError, RuntimeError):
    """Closed form and independent quadrature disagree beyond tolerance."""
