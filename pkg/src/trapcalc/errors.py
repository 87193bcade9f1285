"""Exception types shared across the package.

The CLI maps these onto process exit codes, so the split matters:
usage/validation errors, numeric failures, nonconvergence, and truncation
risk are distinct categories.
"""

from __future__ import annotations


class TrapcalcError(Exception):
    """Base class for all package-specific errors."""


class InvalidPolicyError(TrapcalcError, ValueError):
    """Truncation policy parameters are out of range."""


class ShapeMismatchError(TrapcalcError, ValueError):
    """Vectors or operators built under incompatible dimensions."""


class NumericError(TrapcalcError, ArithmeticError):
    """Non-finite values or an integrator accuracy failure."""


class TruncationRiskError(TrapcalcError):
    """A label or state would put significant mass near the basis cutoff.

    ``suggested_dim`` carries an estimate of a dimension that would bring the
    configuration back inside the trust region (None when no finite
    suggestion makes sense).
    """

    def __init__(self, message: str, suggested_dim: int | None = None):
        super().__init__(message)
        self.suggested_dim = suggested_dim

    def __str__(self) -> str:
        base = super().__str__()
        if self.suggested_dim is not None:
            return f"{base}; suggested dim {self.suggested_dim}"
        return base


class QuadratureError(TrapcalcError):
    """Phase-space quadrature failed its self-consistency check."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class NonconvergenceError(TrapcalcError):
    """An iterative solve stopped before reaching its tolerance."""


class FrameSingularityError(TrapcalcError):
    """The evolution frame hit a zero of the auxiliary solution.

    ``t_singular`` is the first grid time where the modulus dropped below
    the cutoff.
    """

    def __init__(self, message: str, t_singular: float | None = None):
        super().__init__(message)
        self.t_singular = t_singular


class UnstableSystemError(TrapcalcError):
    """No discrete quasienergy ladder exists for the configuration."""


class UnsupportedConfigurationError(TrapcalcError, ValueError):
    """The requested physical configuration is outside the modeled cases."""
