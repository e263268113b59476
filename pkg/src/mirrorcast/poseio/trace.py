"""Recordable, replayable pose traces.

A ``.posetrace`` file is one JSON header line followed by one JSON pose
message per line, timestamps in microseconds. Plain text keeps traces
greppable and diffable; float fields survive the round trip bit-exactly
because messages quantize to f32 on construction and JSON prints shortest
round-trip decimals.
"""

import asyncio
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import TraceHeaderMismatchError, WireFormatError
from .wire import PROTOCOL_NAME, PROTOCOL_VERSION, PoseMessage

COORDINATES_NOTE = "world meters, y up, mirror-local z out of the glass"


@dataclass(frozen=True)
class TraceHeader:
    mirror_width: float
    mirror_height: float
    body: dict = field(default_factory=dict)
    start_epoch_us: int = 0
    units: str = "m"
    coordinates: str = COORDINATES_NOTE
    proto: str = PROTOCOL_NAME
    version: int = PROTOCOL_VERSION

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "TraceHeader":
        doc = json.loads(line)
        if doc.get("proto") != PROTOCOL_NAME or doc.get("version") != PROTOCOL_VERSION:
            raise WireFormatError(
                f"trace header proto/version {doc.get('proto')}/{doc.get('version')} unsupported"
            )
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in doc.items() if k in known})

    def check_against(self, mirror_width: float, mirror_height: float, body: dict):
        """Raise with a field-by-field diff when the trace does not match."""
        diffs = []
        if abs(self.mirror_width - mirror_width) > 1e-9:
            diffs.append(f"  mirror_width: trace {self.mirror_width} != config {mirror_width}")
        if abs(self.mirror_height - mirror_height) > 1e-9:
            diffs.append(f"  mirror_height: trace {self.mirror_height} != config {mirror_height}")
        for key in sorted(set(self.body) | set(body)):
            a, b = self.body.get(key), body.get(key)
            if a != b:
                diffs.append(f"  body.{key}: trace {a} != config {b}")
        if diffs:
            raise TraceHeaderMismatchError("\n".join(diffs))


@dataclass
class PoseTrace:
    header: TraceHeader
    messages: list

    def __post_init__(self):
        self.messages = sorted(self.messages, key=lambda m: m.timestamp_us)

    @property
    def duration_us(self) -> int:
        if len(self.messages) < 2:
            return 0
        return self.messages[-1].timestamp_us - self.messages[0].timestamp_us

    def save(self, path):
        path = Path(path)
        with path.open("w") as fh:
            fh.write(self.header.to_json() + "\n")
            for msg in self.messages:
                fh.write(json.dumps(msg.to_json_dict(), separators=(",", ":")) + "\n")

    @classmethod
    def load(cls, path) -> "PoseTrace":
        path = Path(path)
        with path.open() as fh:
            first = fh.readline()
            if not first.strip():
                raise WireFormatError(f"{path}: empty trace, header line missing")
            header = TraceHeader.from_json(first)
            messages = [
                PoseMessage.from_json_dict(json.loads(line))
                for line in fh
                if line.strip()
            ]
        return cls(header=header, messages=messages)

    def schedule(self, speed: float = 1.0):
        """(offset_seconds, message) pairs; offsets shrink with speed."""
        if speed <= 0:
            raise ValueError(f"replay speed {speed} must be positive")
        if not self.messages:
            return
        t0 = self.messages[0].timestamp_us
        for msg in self.messages:
            yield (msg.timestamp_us - t0) * 1e-6 / speed, msg


class TraceRecorder:
    """Streams messages to disk as they arrive; finalize with close()."""

    def __init__(self, path, header: TraceHeader):
        self.path = Path(path)
        self._fh = self.path.open("w")
        self._fh.write(header.to_json() + "\n")
        self.count = 0

    def append(self, msg: PoseMessage):
        self._fh.write(json.dumps(msg.to_json_dict(), separators=(",", ":")) + "\n")
        self.count += 1

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


async def replay(trace: PoseTrace, deliver, speed: float = 1.0, clock=None):
    """Push trace messages through ``deliver`` on the recorded timeline.

    Scheduling is drift-free: each message waits for its absolute target
    time rather than accumulating per-message sleeps. ``clock`` defaults to
    the running loop's monotonic time.
    """
    loop = asyncio.get_running_loop()
    now = clock if clock is not None else loop.time
    start = now()
    for offset, msg in trace.schedule(speed):
        delay = start + offset - now()
        if delay > 0:
            await asyncio.sleep(delay)
        deliver(msg)


def replay_sync(trace: PoseTrace, deliver, speed: float = 1.0):
    """Blocking replay with the same drift-free schedule."""
    start = time.monotonic()
    for offset, msg in trace.schedule(speed):
        delay = start + offset - time.monotonic()
        if delay > 0:
            time.sleep(delay)
        deliver(msg)
