"""Exception types shared across the package."""


class ThermsimError(Exception):
    """Base class for all package errors."""


class ConfigError(ThermsimError):
    """Experiment configuration is malformed or inconsistent."""


class DenominatorTooSmall(ThermsimError):
    """The source integral fell below half its guaranteed floor."""


class InvalidR(ThermsimError):
    """Regularization parameter must be strictly positive."""


class InvalidExponent(ThermsimError):
    """Diffusion exponent outside the range the formula is valid for."""


class NonConvergence(ThermsimError):
    """An iterative estimator stalled; carries diagnostics in args."""


class StepFailure(ThermsimError):
    """Implicit step did not converge even after dt halvings."""

    def __init__(self, message, *, time=None, dt=None, residual=None, halvings=None):
        super().__init__(message)
        self.time = time
        self.dt = dt
        self.residual = residual
        self.halvings = halvings


class OracleFailure(ThermsimError):
    """Brute-force reference solve could not reach its tolerance."""


class HypothesisViolated(ThermsimError):
    """Input series does not satisfy the differential inequality being checked."""


class EmptySet(ThermsimError):
    """Set-valued estimator received or produced no elements."""
