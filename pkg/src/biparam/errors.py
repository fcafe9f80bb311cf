"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` for bad inputs
(the CLI maps these to exit code 2) and :class:`NumericalError` for solver
failures on valid inputs (exit code 3).
"""

from __future__ import annotations


class BiparamError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(BiparamError, ValueError):
    """Input does not satisfy a documented precondition or invariant."""


class NumericalError(BiparamError, ArithmeticError):
    """A solver could not produce a result within its error contract."""


# generator / chain inputs


class NonSquareError(ValidationError):
    def __init__(self, shape):
        self.shape = tuple(shape)
        super().__init__(f"generator must be a square matrix, got shape {self.shape}")


class NonFiniteError(ValidationError):
    def __init__(self, what="matrix"):
        super().__init__(f"{what} contains non-finite entries")


class NegativeOffDiagonalError(ValidationError):
    def __init__(self, i, j, value):
        self.i, self.j, self.value = i, j, value
        super().__init__(f"off-diagonal entry a[{i}][{j}] = {value!r} is negative")


class PositiveDiagonalError(ValidationError):
    def __init__(self, i, value):
        self.i, self.value = i, value
        super().__init__(f"diagonal entry a[{i}][{i}] = {value!r} is positive")


class RowSumNonZeroError(ValidationError):
    def __init__(self, i, residual):
        self.i, self.residual = i, residual
        super().__init__(f"row {i} sums to {residual!r}, expected 0")


class DimensionMismatchError(ValidationError):
    pass


class NonStochasticInputError(ValidationError):
    pass


class OutOfDomainError(ValidationError):
    pass


class InvalidConfigError(ValidationError):
    pass


# warranty policy


class NotNestedError(ValidationError):
    def __init__(self, k):
        self.k = k
        super().__init__(f"region {k} is not strictly larger than region {k - 1} in both limits")


class NegativeCostError(ValidationError):
    def __init__(self, k):
        self.k = k
        super().__init__(f"region {k} has a negative cost")


class NonPositiveLimitError(ValidationError):
    def __init__(self, k):
        self.k = k
        super().__init__(f"region {k} has a non-positive limit")


class UnsupportedStateCountError(ValidationError):
    pass


# numerical failures


class SingularResolventError(NumericalError):
    pass


class EvaluationFailureError(NumericalError):
    pass


class NonConvergenceError(NumericalError):
    pass


class MaxTermsExceededError(NumericalError):
    pass


class StepTooCoarseError(NumericalError):
    pass


class BudgetExceededError(NumericalError):
    pass


class SingularRatioError(NumericalError):
    pass


class OutOfRangeError(NumericalError):
    pass


class NegativeIncrementError(NumericalError):
    pass


class EntryInversionError(NumericalError):
    """Scalar inversion failure raised while inverting one matrix entry."""

    def __init__(self, i, j, cause):
        self.i, self.j, self.cause = i, j, cause
        super().__init__(f"entry ({i}, {j}): {cause}")
