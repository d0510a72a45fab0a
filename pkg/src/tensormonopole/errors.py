"""Exception hierarchy.

Numerical failures derive from :class:`NumericalFailure` so that callers (and
the command line front end) can separate them from configuration mistakes.
"""


class TensorMonopoleError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(TensorMonopoleError, ValueError):
    """Invalid user supplied configuration or arguments."""


class NumericalFailure(TensorMonopoleError, ArithmeticError):
    """A computation could not be carried out to the requested accuracy."""


class DegeneracyCollision(NumericalFailure):
    """Two band subspaces are too close in energy to be told apart."""


class NotRealizable(NumericalFailure):
    """A subspace is not invariant under complex conjugation."""


class FrameBreakdown(NumericalFailure):
    """Neighbouring frames are too far apart for a reliable transport step."""


class MeshTooCoarse(NumericalFailure):
    """The a-posteriori error estimate of a quadrature exceeds its budget."""


class TailTooFat(NumericalFailure):
    """The extrapolated contribution outside a finite integration domain is too large."""


class NonRotationalSymmetry(NumericalFailure):
    """An integrand expected to be independent of an angle is not."""


class StepTooCoarse(NumericalFailure):
    """Time stepping did not converge after the allowed refinements."""


class FitFailure(NumericalFailure):
    """A scaling fit does not describe the data."""
