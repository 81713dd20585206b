"""
Exception hierarchy for the hspliable package.

Every error carries the process exit code the CLI returns for it, so
app.main() can map failures to exit statuses without knowing their origin.
"""

from typing import Optional


class HspError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(HspError):
    """Invalid run configuration (config file, flags or derived RunConfig)."""

    exit_code = 2


class CsvParseError(HspError):
    """
    Malformed CSV input.

    Args:
        message: Description of the problem
        path: File being parsed
        row: 1-based data row (header excluded), if known
        column: Column name or 1-based column position, if known
    """

    exit_code = 3

    def __init__(self, message: str, path: Optional[str] = None,
                 row: Optional[int] = None, column=None):
        self.path = path
        self.row = row
        self.column = column
        location = []
        if path:
            location.append(str(path))
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column {column}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)


class DimensionError(HspError, ValueError):
    """Array shapes do not conform."""

    exit_code = 4


class NumericalSingularityError(HspError):
    """
    A precision matrix stayed singular after ridge escalation.

    The block index identifies the coefficient block (0 = intercepts,
    j = predictor j, -1 = not block-specific). The iteration is attached by
    the chain runner once the error leaves the kernel.
    """

    exit_code = 5

    def __init__(self, message: str, block: int = -1,
                 iteration: Optional[int] = None):
        self.block = block
        self.iteration = iteration
        self._base_message = message
        super().__init__(self._format())

    def _format(self) -> str:
        text = f"{self._base_message} [block {self.block}]"
        if self.iteration is not None:
            text += f" at iteration {self.iteration}"
        return text

    def with_iteration(self, iteration: int) -> "NumericalSingularityError":
        """Return a copy annotated with the chain iteration."""
        return NumericalSingularityError(self._base_message, self.block, iteration)


class ParameterDomainError(HspError, ValueError):
    """A distribution parameter lies outside its domain."""

    exit_code = 6


class InvalidDatasetError(HspError, ValueError):
    """Dataset contents violate the model's requirements."""

    exit_code = 7


class UnsupportedOperationError(HspError):
    """The requested operation is not available for this family or input."""

    exit_code = 8
