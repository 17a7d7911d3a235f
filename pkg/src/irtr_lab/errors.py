"""Exception types shared across the package."""


class IrtrLabError(Exception):
    """Base class for all package-specific errors."""


class NormalizationError(IrtrLabError):
    """The squared PSF amplitude does not integrate to one."""


class ConvergenceError(IrtrLabError):
    """Quadrature refinement failed to reach the requested tolerance."""


class DegenerateStateError(IrtrLabError):
    """The four-dimensional state representation breaks down.

    Raised when the sources are effectively coincident (1 - delta at
    roundoff scale) or when the overlap scalars are mutually inconsistent.
    """


class CutoffError(IrtrLabError):
    """A mode cutoff cannot capture the required probability mass."""


class DegenerateOutcomeError(IrtrLabError):
    """An outcome has vanishing probability but a non-vanishing derivative.

    Such outcomes carry formally divergent Fisher information per unit
    probability and need analytic treatment, not a numerical sum.
    """


class BoundViolationError(IrtrLabError):
    """A classical Fisher information exceeded its quantum bound."""


class InfeasibleBudgetError(IrtrLabError):
    """An error budget violates the single-parameter Cramer-Rao bound."""


class ConfigError(IrtrLabError):
    """Invalid experiment configuration."""
