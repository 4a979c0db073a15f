"""Changepoint-detection exception classes."""

from typing import Any, Optional, Sequence


class BocdError(Exception):
    """Base exception for all changepoint-detection errors."""
    pass


class DomainError(BocdError):
    """Raised when an observation or parameter lies outside its support."""
    pass


class DegenerateDataError(BocdError):
    """Raised when a maximum likelihood estimate does not exist for the data."""
    pass


class PosteriorError(BocdError):
    """Raised when a posterior cannot be built or kept positive definite."""
    pass


class TruncationMassError(BocdError):
    """Raised when a truncation region carries (almost) no probability mass."""

    def __init__(self, message: str, coordinates: Sequence[int]):
        super().__init__(message)
        self.coordinates = list(coordinates)


class CalibrationError(BocdError):
    """Raised when learning-rate calibration cannot be carried out."""
    pass


class ZeroDensityError(BocdError):
    """Raised when every run-length hypothesis assigns zero density to x_t."""

    def __init__(self, t: int, x: Any):
        super().__init__(f"All predictive densities are zero at t={t} (x={x})")
        self.t = t
        self.x = x


class UnsupportedPredictiveError(BocdError):
    """Raised when a closed-form predictive is requested but not registered."""
    pass


class ConfigError(BocdError):
    """Raised when a detector configuration cannot be parsed or validated."""
    pass


class CsvParseError(BocdError):
    """Raised when a CSV file cannot be turned into a numeric matrix."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        super().__init__(message)
        self.row = row
        self.column = column


class StreamSpecError(BocdError):
    """Raised when a synthetic stream specification is inconsistent."""
    pass


class DetectionError(BocdError):
    """Raised when a detector run fails part-way; carries the partial result."""

    def __init__(self, message: str, partial_result: Any = None):
        super().__init__(message)
        self.partial_result = partial_result
