"""Exception hierarchy shared across the engine."""


class ParleyError(Exception):
    """Base class for all engine errors."""


class GrammarError(ParleyError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class EmptyScript(ParleyError):
    pass


class SchemaError(ParleyError):
    pass


class GatewayError(ParleyError):
    pass


class BackendUnavailable(GatewayError):
    pass


class UnknownId(ParleyError):
    pass


class UnknownStage(ParleyError):
    pass


class IndexOutOfRange(ParleyError):
    pass


class OutOfOrder(ParleyError):
    pass


class EmptyBuffer(ParleyError):
    pass


class InsufficientContext(ParleyError):
    pass


class DimensionMismatch(ParleyError):
    pass


class EmptyText(ParleyError):
    pass


class UnknownRequest(ParleyError):
    pass


class AlreadyFulfilled(ParleyError):
    pass


class NonMonotonicTime(ParleyError):
    pass


class ConfigError(ParleyError):
    pass


class CorruptLog(ParleyError):
    def __init__(self, message, seq=None):
        super().__init__(message if seq is None else f"seq {seq}: {message}")
        self.seq = seq
