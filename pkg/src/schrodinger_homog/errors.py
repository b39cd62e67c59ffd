"""Exception hierarchy shared by every stage of the toolkit."""


class HomogenizationError(Exception):
    """Base class; ``stage`` names the pipeline stage that failed, when known."""

    stage: str | None = None


class NonElliptic(HomogenizationError, ValueError):
    pass


class NonFinite(HomogenizationError, ValueError):
    pass


class ZeroMeanViolated(HomogenizationError, ValueError):
    pass


class GridMismatch(HomogenizationError, ValueError):
    pass


class SolverDiverged(HomogenizationError, RuntimeError):
    pass


class AsymmetryExceeded(HomogenizationError, RuntimeError):
    pass


class NegativeMu(HomogenizationError, RuntimeError):
    pass


class MeshTooCoarse(HomogenizationError, ValueError):
    pass


class LinearSolveFailed(HomogenizationError, RuntimeError):
    pass


class NotPositiveDefinite(HomogenizationError, ValueError):
    pass


class MeanZeroRequired(HomogenizationError, ValueError):
    pass


class ParseError(HomogenizationError, ValueError):
    pass


class SchemaViolation(HomogenizationError, ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class UnsatisfiableResolution(HomogenizationError, ValueError):
    pass


class StageError(HomogenizationError, RuntimeError):
    """Wraps a failure raised inside a named pipeline stage."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
