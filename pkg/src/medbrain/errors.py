"""Exception types shared across the engine.

Plain invalid arguments raise ValueError; everything domain-specific
derives from MedbrainError so callers can catch one base.
"""


class MedbrainError(Exception):
    pass


class DiseaseDbParseError(MedbrainError):
    """Disease database text did not match the record format."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class TransportError(MedbrainError):
    """Network-level failure: unreachable endpoint, timeout, connection reset."""


class NotFoundError(MedbrainError):
    """The requested resource does not exist (article, session, ...)."""


class ProtocolError(MedbrainError):
    """The remote peer answered, but not in the agreed wire format."""


class NoScriptError(MedbrainError):
    """Scripted backend had no matching rule and no default response."""


class EmptyKeywordsError(MedbrainError):
    """Keyword-extraction output contained no usable keyword."""


class PipelineError(MedbrainError):
    """Wraps a gateway failure with the pipeline stage it occurred in."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage}: {cause}")
        self.stage = stage
        self.__cause__ = cause


class ConfigError(MedbrainError):
    """Service configuration invalid or refers to unreadable files."""
