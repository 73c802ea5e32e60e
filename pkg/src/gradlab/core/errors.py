"""Exception hierarchy.

Every error carries the exit code the CLI returns for it, so library code
raises and only ``gradlab.__main__`` translates.
"""

from __future__ import annotations


class GradLabError(Exception):
    """Base class for all gradlab errors."""

    exit_code: int = 1


class ConfigError(GradLabError, ValueError):
    """Invalid parameter, unknown tag or inconsistent configuration."""

    exit_code = 2


class InputShapeError(ConfigError):
    """Input length does not match the model's input dimension."""


class ClassIndexError(ConfigError, IndexError):
    """Class index outside ``[0, output_dim)``."""


class RenderError(ConfigError):
    """Image geometry incompatible with the saliency map."""


class DataError(GradLabError, ValueError):
    """Missing, empty or unusable data."""

    exit_code = 3


class FormatError(DataError):
    """Malformed IDX file; ``offset`` is the byte where parsing failed."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class CheckpointError(DataError):
    """Unreadable or incompatible AGCK checkpoint."""


class NumericError(GradLabError, ArithmeticError):
    """A computation produced a non-finite or otherwise unusable value."""

    exit_code = 4


class DomainError(NumericError, ValueError):
    """Argument outside the mathematical domain of a function."""


class QuadratureError(NumericError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, value: float, error_bound: float):
        super().__init__(
            f"{message}: best estimate {value!r}, error bound {error_bound!r}"
        )
        self.value = value
        self.error_bound = error_bound


class UndefinedMetricError(NumericError, ValueError):
    """Metric is undefined for the given map (empty or all zeros)."""
