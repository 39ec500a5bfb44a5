"""Exception hierarchy shared across the package."""


class GenjikoError(Exception):
    """Base class for all domain errors raised by this package."""


class DomainError(GenjikoError):
    """Input outside the documented domain of an operation."""


class InvalidJudgmentError(GenjikoError):
    """A match/new judgment that is not legal at its round."""


class ProtocolError(GenjikoError):
    """An action attempted in a session phase where it is not legal."""

    def __init__(self, message: str, *, phase: str = "", action: str = ""):
        super().__init__(message)
        self.phase = phase
        self.action = action


class CorruptLogError(GenjikoError):
    """An event log that cannot be replayed into a legal session."""

    def __init__(self, message: str, *, seq_no: int):
        super().__init__(message)
        self.seq_no = seq_no


class ParseError(GenjikoError):
    """Malformed recording CSV or metadata."""

    def __init__(self, message: str, *, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ArtifactError(GenjikoError):
    """Unreadable, truncated, or version-mismatched model artifact."""


class TokenError(GenjikoError):
    """Unknown, expired, or already-used session token."""


class LlmClientError(GenjikoError):
    """Live language-model client failure."""

    def __init__(self, message: str, *, retry_after_s: float | None = None):
        super().__init__(message)
        self.retry_after_s = retry_after_s
