"""Binary pose wire format and its JSON twin.

Frames are length-prefixed little-endian: a u32 payload length, then
entity u8, sender u16, sequence u64, timestamp u64 (microseconds), position
3xf32, orientation 4xf32 (w, x, y, z). Positions ride as 32-bit floats
(sub-millimeter at room scale); message objects quantize their floats on
construction so encode/decode round-trips are bit-exact.

A sender may open with a one-line JSON handshake declaring protocol version,
units and its epoch; JSON text starts with ``{`` which can never collide with
the fixed binary length prefix.
"""

import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFiniteValueError, TruncatedFrameError, UnknownEntityError, WireFormatError
from ..geometry import Entity, Pose

PROTOCOL_NAME = "mirrorcast-pose"
PROTOCOL_VERSION = 1

_PAYLOAD = struct.Struct("<BHQQ3f4f")
_PREFIX = struct.Struct("<I")

FRAME_SIZE = _PREFIX.size + _PAYLOAD.size

_ENTITY_CODES = {e: i for i, e in enumerate(Entity)}
_CODE_ENTITIES = {i: e for e, i in _ENTITY_CODES.items()}


def _f32(values, name: str) -> tuple:
    quantized = tuple(float(np.float32(v)) for v in values)
    for v in quantized:
        if not math.isfinite(v):
            raise NonFiniteValueError(f"field {name} contains a non-finite value")
    return quantized


@dataclass(frozen=True)
class PoseMessage:
    """Wire form of a pose sample: Pose fields plus sender id and sequence."""

    entity: Entity
    position: tuple
    orientation: tuple = (1.0, 0.0, 0.0, 0.0)
    timestamp_us: int = 0
    sequence: int = 0
    sender_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "entity", Entity(self.entity))
        object.__setattr__(self, "position", _f32(self.position, "position"))
        object.__setattr__(self, "orientation", _f32(self.orientation, "orientation"))
        if self.timestamp_us < 0 or self.sequence < 0:
            raise WireFormatError("timestamp and sequence must be non-negative")

    def to_pose(self) -> Pose:
        return Pose(
            entity=self.entity,
            position=np.array(self.position),
            orientation=np.array(self.orientation),
            timestamp_us=self.timestamp_us,
        )

    def to_json_dict(self) -> dict:
        return {
            "entity": self.entity.value,
            "sender": self.sender_id,
            "seq": self.sequence,
            "t_us": self.timestamp_us,
            "pos": list(self.position),
            "quat": list(self.orientation),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "PoseMessage":
        try:
            entity = Entity(d["entity"])
        except (KeyError, ValueError):
            raise UnknownEntityError(f"field entity: unknown value {d.get('entity')!r}")
        try:
            return cls(
                entity=entity,
                position=tuple(d["pos"]),
                orientation=tuple(d["quat"]),
                timestamp_us=int(d["t_us"]),
                sequence=int(d["seq"]),
                sender_id=int(d.get("sender", 0)),
            )
        except KeyError as exc:
            raise WireFormatError(f"field {exc.args[0]}: missing")


def encode(msg: PoseMessage) -> bytes:
    payload = _PAYLOAD.pack(
        _ENTITY_CODES[msg.entity],
        msg.sender_id,
        msg.sequence,
        msg.timestamp_us,
        *msg.position,
        *msg.orientation,
    )
    return _PREFIX.pack(len(payload)) + payload


def decode(buf: bytes) -> PoseMessage:
    if len(buf) < _PREFIX.size:
        raise TruncatedFrameError(f"frame of {len(buf)} bytes is shorter than the length prefix")
    (length,) = _PREFIX.unpack_from(buf)
    if length != _PAYLOAD.size:
        raise TruncatedFrameError(
            f"field length: declared payload {length}, expected {_PAYLOAD.size}"
        )
    if len(buf) < _PREFIX.size + length:
        raise TruncatedFrameError(
            f"frame truncated: {len(buf)} bytes for a declared {_PREFIX.size + length}"
        )
    code, sender, seq, t_us, px, py, pz, qw, qx, qy, qz = _PAYLOAD.unpack_from(
        buf, _PREFIX.size
    )
    if code not in _CODE_ENTITIES:
        raise UnknownEntityError(f"field entity: unknown code {code}")
    for name, values in (("position", (px, py, pz)), ("orientation", (qw, qx, qy, qz))):
        for v in values:
            if not math.isfinite(v):
                raise NonFiniteValueError(f"field {name} contains a non-finite value")
    return PoseMessage(
        entity=_CODE_ENTITIES[code],
        position=(px, py, pz),
        orientation=(qw, qx, qy, qz),
        timestamp_us=t_us,
        sequence=seq,
        sender_id=sender,
    )


def encode_handshake(sender_id: int, epoch_us: int | None = None) -> bytes:
    doc = {
        "proto": PROTOCOL_NAME,
        "version": PROTOCOL_VERSION,
        "units": "m",
        "sender": sender_id,
    }
    if epoch_us is not None:
        doc["epoch_us"] = epoch_us
    return (json.dumps(doc, separators=(",", ":")) + "\n").encode()


def decode_handshake(buf: bytes) -> dict:
    try:
        doc = json.loads(buf.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise WireFormatError(f"handshake is not valid JSON: {exc}")
    if doc.get("proto") != PROTOCOL_NAME:
        raise WireFormatError(f"field proto: expected {PROTOCOL_NAME!r}, got {doc.get('proto')!r}")
    if doc.get("version") != PROTOCOL_VERSION:
        raise WireFormatError(
            f"field version: peer speaks {doc.get('version')}, this end {PROTOCOL_VERSION}"
        )
    return doc


def is_handshake(buf: bytes) -> bool:
    return buf[:1] == b"{"
