"""
Exception hierarchy for honeyguard
"""

from typing import Optional


class HoneyguardError(Exception):
    """Base class for all honeyguard errors"""


class InputError(HoneyguardError):
    """Problems with user-supplied input (files, flags, scenarios)"""


class ConfigError(InputError):
    """Invalid or inconsistent configuration"""


class MalformedFile(InputError):
    """Capture file cannot be parsed at all"""


class MalformedLine(InputError):
    """One NDJSON line failed validation"""

    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number
        self.reason = reason


class TruncatedPacket(InputError):
    """Captured length is shorter than the headers we need"""


class InvalidRecord(InputError, ValueError):
    """PacketRecord field violates an invariant"""


class InvalidScenario(InputError, ValueError):
    """Synthetic scenario parameters are inconsistent"""


class OutOfOrderTimestamp(HoneyguardError):
    """Append to the traffic store went backwards in time"""

    def __init__(self, ts: float, last_ts: float):
        super().__init__(f"timestamp {ts} precedes {last_ts}")
        self.ts = ts
        self.last_ts = last_ts


class EmptyHost(HoneyguardError):
    """Feature extraction requested for a host with no packets"""


class EmptyWindow(HoneyguardError):
    """Training window holds no labeled hosts"""


class WindowOutOfRange(HoneyguardError):
    """Requested window starts before the store horizon"""


class NoValidSplit(HoneyguardError):
    """No feature offers a threshold between distinct values"""


class SchemaMismatch(HoneyguardError):
    """Feature schema of a vector or model file does not match"""

    def __init__(self, expected: int, actual: int, context: Optional[str] = None):
        message = f"schema hash {actual:#018x} != expected {expected:#018x}"
        if context:
            message = f"{context}: {message}"
        super().__init__(message)
        self.expected = expected
        self.actual = actual


class LengthMismatch(HoneyguardError, ValueError):
    """Prediction and truth lists differ in length"""


class ModelFormatError(HoneyguardError):
    """Model file could not be decoded"""


class BadMagic(ModelFormatError):
    pass


class UnsupportedVersion(ModelFormatError):
    pass


class CorruptPayload(ModelFormatError):
    pass


class ChannelUnavailable(HoneyguardError):
    """Model channel I/O failed"""
