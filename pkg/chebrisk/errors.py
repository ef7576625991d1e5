"""Errors raised by the risk pipeline."""


class StageError(RuntimeError):
    """Wraps a failure inside one pipeline stage (rescale, moments, certificates, contract)."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage} stage failed: {cause}")
        self.stage = stage
        self.cause = cause


class ProblemFileError(ValueError):
    """Raised when a problem file fails schema or semantic validation."""
