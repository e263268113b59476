"""UDP tracker ingest: loss-tolerant, latest-wins datagram input."""

import asyncio
import logging
import time
from dataclasses import dataclass, field

from ..errors import WireFormatError
from . import wire

log = logging.getLogger(__name__)

CLOCK_SKEW_LIMIT_US = 5_000_000


@dataclass
class IngestStats:
    received: int = 0
    malformed: int = 0
    handshakes: int = 0
    clock_rejected: int = 0


class UdpPoseIngest(asyncio.DatagramProtocol):
    """Feeds decoded pose messages to ``on_message(msg, recv_mono)``.

    A JSON handshake datagram declares a sender's epoch; once declared, later
    messages from that sender must carry timestamps within +/-5 s of this
    receiver's clock after offset correction.
    """

    def __init__(self, on_message, epoch_us=None):
        self.on_message = on_message
        self.stats = IngestStats()
        self._offsets: dict[int, int] = {}
        self._epoch_us = epoch_us if epoch_us is not None else lambda: int(time.time() * 1e6)
        self.transport = None

    def connection_made(self, transport):
        self.transport = transport

    def datagram_received(self, data, addr):
        recv_mono = time.monotonic()
        if wire.is_handshake(data):
            try:
                doc = wire.decode_handshake(data)
            except WireFormatError as exc:
                self.stats.malformed += 1
                log.warning("bad handshake from %s: %s", addr, exc)
                return
            self.stats.handshakes += 1
            if "epoch_us" in doc:
                self._offsets[int(doc.get("sender", 0))] = int(doc["epoch_us"]) - self._epoch_us()
            return
        try:
            msg = wire.decode(data)
        except WireFormatError as exc:
            self.stats.malformed += 1
            log.warning("dropped malformed datagram from %s: %s", addr, exc)
            return
        offset = self._offsets.get(msg.sender_id)
        if offset is not None:
            corrected = msg.timestamp_us - offset
            if abs(corrected - self._epoch_us()) > CLOCK_SKEW_LIMIT_US:
                self.stats.clock_rejected += 1
                log.warning(
                    "rejected %s message %d: corrected timestamp off by > 5 s",
                    msg.entity.value, msg.sequence,
                )
                return
        self.stats.received += 1
        self.on_message(msg, recv_mono)


async def open_ingest(on_message, host: str = "0.0.0.0", port: int = 47800, epoch_us=None):
    """Bind the UDP socket; returns (transport, protocol)."""
    loop = asyncio.get_running_loop()
    return await loop.create_datagram_endpoint(
        lambda: UdpPoseIngest(on_message, epoch_us=epoch_us), local_addr=(host, port)
    )
