"""Exception types shared across the toolkit."""


class HallucError(Exception):
    """Base class for all toolkit errors."""


class ParseError(HallucError, ValueError):
    """A text record could not be parsed; carries file location when known."""

    def __init__(self, message, line=None, token_index=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if token_index is not None:
            loc.append(f"token {token_index}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.line = line
        self.token_index = token_index


class DegenerateMetricError(HallucError, ValueError):
    """A metric is mathematically undefined on the given input."""


class RemoteServiceError(HallucError):
    """Base class for remote infill/predict service failures."""


class TransportError(RemoteServiceError):
    """The service could not be reached or the connection failed."""


class ProtocolError(RemoteServiceError):
    """The service answered, but not in the agreed wire format."""


class SentinelOutputError(ProtocolError):
    """The service returned a sequence still containing a mask sentinel."""
