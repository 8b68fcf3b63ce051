"""Exception types shared across the package."""


class QBenchError(Exception):
    """Base class for all package errors."""


class ConfigError(QBenchError):
    """Invalid user configuration (CLI exit code 2)."""


class BackendError(QBenchError):
    """Backend failure (CLI exit code 3)."""


class NoPath(QBenchError):
    pass


class WidthExceeded(QBenchError):
    pass


class ZeroBranch(QBenchError):
    pass


class EmptyHistogram(QBenchError):
    pass


class MissingSetting(QBenchError):
    pass


class IncompleteCoverage(QBenchError):
    pass


class ResolutionMismatch(QBenchError):
    pass


class NormViolation(QBenchError):
    pass


class IncompleteBatch(QBenchError):
    pass


class DegenerateSigmas(QBenchError):
    pass


class NoConvergence(QBenchError):
    pass


class InsufficientPoints(QBenchError):
    pass


class MissingBenchmark(QBenchError):
    pass


class MissingData(QBenchError):
    pass


class Timeout(BackendError):
    pass


class MalformedJob(BackendError):
    pass
