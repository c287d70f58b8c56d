"""
Exception hierarchy for SmoothCert.

Every error carries the process exit code the command-line front end
reports for it, so library code can raise without knowing about the CLI.
"""

from typing import Optional


class SmoothCertError(Exception):
    """Base class for all SmoothCert errors."""

    exit_code = 1


class DomainError(SmoothCertError, ValueError):
    """An argument lies outside the domain of an operation."""

    exit_code = 2


class InfiniteQuantileError(DomainError):
    """The Gaussian quantile of 0 or 1 was requested."""

    def __init__(self, p: float):
        super().__init__(f"Gaussian quantile of {p!r} is infinite")
        self.p = p


class ConfigError(SmoothCertError):
    """Invalid or inconsistent configuration."""

    exit_code = 2


class DataFormatError(SmoothCertError):
    """Malformed score, certificate or label file."""

    exit_code = 3

    def __init__(self, message: str, offset: Optional[int] = None, line: Optional[int] = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        elif line is not None:
            message = f"{message} (at line {line})"
        super().__init__(message)
        self.offset = offset
        self.line = line


class DimensionMismatchError(DataFormatError):
    """Declared and actual dimensions disagree."""

    def __init__(self, what: str, expected, found, offset: Optional[int] = None,
                 line: Optional[int] = None):
        super().__init__(f"{what}: expected {expected}, found {found}", offset=offset, line=line)
        self.expected = expected
        self.found = found


class NumericalConsistencyError(SmoothCertError):
    """Two independent numerical estimates of the same quantity disagree."""

    exit_code = 4


class SamplingError(SmoothCertError):
    """The base classifier failed while scoring a noisy sample."""

    def __init__(self, row: int, cause: BaseException):
        super().__init__(f"Classifier failed on noise row {row}: {cause}")
        self.row = row
