"""Exception types shared across the package."""


class PepGlmError(Exception):
    """Base class for all package-specific errors."""


class DataValidationError(PepGlmError, ValueError):
    """Input data violates a structural or family constraint."""


class NumericalRangeError(PepGlmError, ArithmeticError):
    """A computation left the representable floating-point range."""


class SingularSystemError(PepGlmError, ArithmeticError):
    """A linear system required by a fit or density is singular."""


class FitDivergedError(PepGlmError, ArithmeticError):
    """An iterative fit produced non-finite intermediate values."""


class EvaluationError(PepGlmError, ArithmeticError):
    """A density evaluation failed (e.g. non-positive-definite weight matrix)."""


class ConfigurationError(PepGlmError, ValueError):
    """An invalid prior/sampler/CLI configuration was supplied."""
