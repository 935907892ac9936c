"""Exception hierarchy shared by all modules."""


class CqedError(Exception):
    """Base class for library errors."""


class ValidationError(CqedError, ValueError):
    """Input violates a documented invariant (nonpositive element, bad name, ...)."""


class DegenerateMatrixError(CqedError, ValueError):
    """Capacitance matrix is singular; ``node`` names the offending node if known."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class ConvergenceError(CqedError, RuntimeError):
    """A truncated basis did not converge to the requested tolerance."""


class SingularityError(CqedError, ZeroDivisionError):
    """Perturbative formula evaluated at a resonance."""


class FitError(CqedError, RuntimeError):
    """Resonance fit could not produce a result."""


class NotAResonanceError(FitError):
    """No resonance feature was found in the trace."""


class InvalidFitError(FitError):
    """Fit converged to unphysical parameters; ``diagnostics`` holds the raw values."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
