"""Exception types raised across the package.

Every error that callers are expected to catch derives from
:class:`EntropyEmbedError`, so ``except EntropyEmbedError`` at a CLI or
script boundary is enough to separate "bad input / degenerate data" from
genuine bugs.
"""


class EntropyEmbedError(Exception):
    """Base class for all package-specific errors."""


class ConstantChannel(EntropyEmbedError):
    """A channel has (near-)zero variance and cannot be normalized."""


class SeriesTooShort(EntropyEmbedError):
    """Not enough samples for the requested lag depth d*m."""


class NotEnoughNeighbors(EntropyEmbedError):
    """Too few admissible points after Theiler exclusion for a k-NN query."""


class DomainError(EntropyEmbedError):
    """Function argument outside its mathematical domain."""


class SingularCovariance(EntropyEmbedError):
    """Sample covariance is numerically singular; Mahalanobis KDE undefined."""


class DegenerateResidual(EntropyEmbedError):
    """All KDE residuals are exactly zero, so the log-residual score diverges."""


class EmptyPool(EntropyEmbedError):
    """Candidate pool is empty where at least one candidate is required."""


class ShapeMismatch(EntropyEmbedError):
    """Array arguments have inconsistent shapes."""


class Diverged(EntropyEmbedError):
    """Simulated map diverged on every restart attempt."""


class CsvFormatError(EntropyEmbedError):
    """A series CSV file is malformed."""
