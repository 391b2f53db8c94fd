"""Exception types shared across the package."""


class UnifecError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(UnifecError):
    """Invalid or inconsistent run configuration."""


class DegenerateMetricError(UnifecError):
    """A metric set contains no finite value, so it cannot be normalized."""


class DegenerateRowError(UnifecError):
    """A parity-check row of weight < 2 cannot produce outgoing messages."""


class ButterflyError(UnifecError):
    """Trellis branch metrics do not form +/-gamma butterflies of one kind."""


class FileFormatError(UnifecError):
    """Malformed data file (LLR / bits / permutation lines)."""


class AlistFormatError(UnifecError):
    """Malformed alist text.  Carries a 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MatrixConsistencyError(UnifecError):
    """Row and column adjacency sections of a parity-check matrix disagree."""


class EncoderRankError(UnifecError):
    """Parity-check matrix is rank deficient; systematic encoding impossible."""
