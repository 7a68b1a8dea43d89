"""
Custom exception classes and exit codes for the unlearning toolkit.
"""
from typing import Any


class ExitCode:
    """Process exit codes used by the CLI."""

    OK = 0
    VALIDATION_ERROR = 2  # Invalid input, shapes, budgets, config values
    NOT_FOUND = 3  # Missing dataset, checkpoint, config or preset
    NUMERICAL_ERROR = 4  # Non-convergence, non-finite values during training
    FORMAT_ERROR = 5  # Unreadable or unsupported file documents


class UnlearnToolkitException(Exception):
    """Base exception for the toolkit."""

    def __init__(self, detail: str, exit_code: int = ExitCode.VALIDATION_ERROR):
        super().__init__(detail)
        self.detail = detail
        self.exit_code = exit_code


class ValidationException(UnlearnToolkitException):
    """Invalid input exception."""

    def __init__(self, detail: str):
        super().__init__(detail=detail, exit_code=ExitCode.VALIDATION_ERROR)


class ShapeMismatchException(ValidationException):
    """Matrix or layer dimensions do not compose."""

    def __init__(self, operation: str, expected: Any, actual: Any):
        super().__init__(detail=f"{operation}: expected shape {expected}, got {actual}")


class NonFiniteValueException(ValidationException):
    """NaN or Inf found where only finite values are allowed."""

    def __init__(self, operation: str):
        super().__init__(detail=f"{operation}: input contains non-finite values")


class AsymmetricMatrixException(ValidationException):
    """Matrix expected to be symmetric is not."""

    def __init__(self, deviation: float):
        super().__init__(detail=f"Matrix is not symmetric (max deviation {deviation:.3e})")


class InvalidAlphaException(ValidationException):
    """Scaling coefficient outside (0, inf)."""

    def __init__(self, alpha: float):
        super().__init__(detail=f"Scaling coefficient must be positive, got {alpha}")


class InvalidPercentageException(ValidationException):
    """Accuracy outside [0, 100]."""

    def __init__(self, name: str, value: float):
        super().__init__(detail=f"{name} must lie in [0, 100], got {value}")


class InvalidClassSetException(ValidationException):
    """Forget/retain class selection is not usable."""

    def __init__(self, detail: str = "Invalid class selection"):
        super().__init__(detail=detail)


class SampleBudgetExceededException(ValidationException):
    """Requested more representation samples than available."""

    def __init__(self, partition: str, requested: int, available: int):
        super().__init__(
            detail=f"{partition} budget of {requested} samples exceeds the {available} available"
        )


class NotFoundException(UnlearnToolkitException):
    """Resource not found exception."""

    def __init__(self, resource: str, identifier: Any):
        super().__init__(
            detail=f"{resource} '{identifier}' not found",
            exit_code=ExitCode.NOT_FOUND,
        )


class DatasetNotFoundException(NotFoundException):
    """Dataset file not found exception."""

    def __init__(self, path: Any):
        super().__init__(resource="Dataset file", identifier=path)


class CheckpointNotFoundException(NotFoundException):
    """Checkpoint file not found exception."""

    def __init__(self, path: Any):
        super().__init__(resource="Checkpoint file", identifier=path)


class ConfigNotFoundException(NotFoundException):
    """Experiment config file not found exception."""

    def __init__(self, path: Any):
        super().__init__(resource="Config file", identifier=path)


class PresetNotFoundException(NotFoundException):
    """Named preset not found exception."""

    def __init__(self, name: str):
        super().__init__(resource="Preset", identifier=name)


class NumericalException(UnlearnToolkitException):
    """Numerical failure exception."""

    def __init__(self, detail: str):
        super().__init__(detail=detail, exit_code=ExitCode.NUMERICAL_ERROR)


class ConvergenceException(NumericalException):
    """Iterative method did not converge."""

    def __init__(self, method: str, iterations: int, residual: float):
        super().__init__(
            detail=f"{method} did not converge after {iterations} sweeps (residual {residual:.3e})"
        )


class NonFiniteLossException(NumericalException):
    """Loss became NaN or Inf."""

    def __init__(self, loss: float):
        super().__init__(detail=f"Loss is not finite ({loss})")


class CheckpointFormatException(UnlearnToolkitException):
    """Checkpoint document cannot be read."""

    def __init__(self, detail: str):
        super().__init__(detail=detail, exit_code=ExitCode.FORMAT_ERROR)
