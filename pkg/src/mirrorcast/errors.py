"""Exception taxonomy shared across the package."""


class MirrorcastError(Exception):
    """Base class for all errors raised by this package."""


class BehindMirrorError(MirrorcastError):
    """A pose sits on or behind the glass plane where no reflection exists."""


class DegenerateInputError(MirrorcastError):
    """Player and viewer coincide on the glass itself; the reflection point is undefined."""


class CalibrationError(MirrorcastError):
    """Invalid tracker/mount calibration data (e.g. a non-unit quaternion)."""


class PoseValidityError(MirrorcastError):
    """A pose set violates a physical precondition (e.g. head below feet)."""


class InsufficientOverscanError(MirrorcastError):
    """The viewer-dependent blit rectangle does not fit in the overscanned texture.

    Carries ``required`` - the smallest overscan factor that would fit.
    """

    def __init__(self, message: str, required: float):
        super().__init__(message)
        self.required = required


class WireFormatError(MirrorcastError):
    """Base class for pose wire-format violations."""


class TruncatedFrameError(WireFormatError):
    """Byte buffer shorter than its declared length."""


class UnknownEntityError(WireFormatError):
    """Entity code not in the tracked-entity enumeration."""


class NonFiniteValueError(WireFormatError):
    """A float field decoded (or was about to encode) as NaN/Inf."""


class StaleEntityError(MirrorcastError):
    """An entity has no sample inside the staleness window around the query time."""

    def __init__(self, message: str, entities: list[str]):
        super().__init__(message)
        self.entities = entities


class TraceHeaderMismatchError(MirrorcastError):
    """Trace header disagrees with the session configuration.

    ``diff`` is a human-readable summary of the mismatching fields.
    """

    def __init__(self, diff: str):
        super().__init__(f"trace header incompatible with session config:\n{diff}")
        self.diff = diff


class ConfigError(MirrorcastError):
    """Invalid configuration value; the message names the offending field."""


class ProtocolError(MirrorcastError):
    """Client/server protocol version or framing mismatch."""
