"""Exception types shared across the package.

Validation errors signal bad inputs or domain violations; numeric errors
signal a computation that started from valid inputs but could not be
completed reliably.  The CLI maps the former to exit code 2 and the
latter to exit code 3.
"""


class ValidationError(ValueError):
    """Input rejected before any real computation ran."""


class AtomRadiusError(ValidationError):
    """Query landed on a circle carrying an atom (no density there)."""


class NumericError(RuntimeError):
    """A numerical routine failed to produce a trustworthy result."""


class RootConvergenceError(NumericError):
    """Root finder left some roots unconverged after restarts.

    Carries the partial state so callers can inspect instead of
    silently dropping roots.
    """

    def __init__(self, msg, zeros=None, unconverged=None):
        super().__init__(msg)
        self.zeros = zeros
        self.unconverged = unconverged


class ContourZeroError(NumericError):
    """A zero sits on (or numerically on) an integration contour."""


class IntegrabilityError(NumericError):
    """A target measure fails the integrability condition near r = 0."""
