"""Exception types shared across the package.

Every numerical refusal carries enough context to act on (offending size,
condition estimate, budget overrun); callers should not need to parse
messages to branch on failure modes.
"""


class UnsupportedDegreeError(ValueError):
    """Polynomial degree above the supported guard."""


class UnsupportedSizeError(ValueError):
    """Quadrature size outside the supported range."""


class ShapeMismatchError(ValueError):
    """Dimension or index-set mismatch between operands."""


class DomainError(ValueError):
    """Parameter outside its mathematical domain (sigma <= 0, beta not in (0,1), ...)."""


class BudgetError(ValueError):
    """Requested construction exceeds an explicit size or cost budget."""


class ConditioningError(ArithmeticError):
    """Gram system too ill-conditioned to solve reliably."""

    def __init__(self, message: str, condition_estimate: float):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class NumericalConsistencyError(ArithmeticError):
    """A quantity violated a consistency bound beyond round-off tolerance."""


class EvaluationError(RuntimeError):
    """A user-supplied function returned a non-finite value."""


class InsufficientDataError(ValueError):
    """Not enough data points for the requested estimate."""
