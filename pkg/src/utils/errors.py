"""
Error types for the circuit optimizer

Split rejections and synthesis misses are ordinary return values; the
exceptions below are reserved for contract violations, bad input files
and resource limits.
"""

from typing import Optional


class QoptError(Exception):
    """Base class for all optimizer errors"""


class CircuitValidationError(QoptError, ValueError):
    """A gate or circuit violates its structural invariants"""


class QasmParseError(QoptError):
    """QASM text could not be parsed"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class ResourceLimitError(QoptError):
    """A dense computation would exceed the configured size cap"""


class ConfigurationError(QoptError, ValueError):
    """Inconsistent run configuration detected before any work starts"""


class GateSetMismatchError(QoptError, ValueError):
    """A model, database or circuit was built for a different gate set"""


class VerificationError(QoptError):
    """An optimized circuit is not equivalent to its source"""


class FileFormatError(QoptError):
    """A binary artifact could not be decoded"""


class ChecksumError(FileFormatError):
    """Trailing CRC32 does not match the file contents"""


class FormatVersionError(FileFormatError):
    """The file was written by an incompatible format version"""


class UsageError(QoptError):
    """Invalid command-line usage"""
