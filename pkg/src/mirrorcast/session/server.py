"""Network front of the session: UDP tracker ingest in, WebSocket frames out.

Protocol (default port 47801): JSON text frames over a WebSocket at ``/ws``.
On connect the server sends ``{"type": "config", ...}`` followed by the
latest frame, then every new frame as ``{"type": "frame", ...}``. A client
may pin the protocol with ``?proto=N``; mismatches are rejected with an
error frame and a close. ``POST /simulated-pose`` accepts the JSON form of
PoseMessage (object or list) for environments without UDP; ``GET /frame``,
``GET /config`` and ``GET /stats`` serve the latest state for polling
clients and diagnostics.

The tick loop never blocks on clients: each client has a bounded queue and
one sender task; a client that falls a full queue behind is disconnected.
"""

import asyncio
import contextlib
import json
import logging
import time

import numpy as np
from aiohttp import WSMsgType, web

from ..errors import MirrorcastError, StaleEntityError, WireFormatError
from ..geometry import Entity
from ..poseio.ingest import open_ingest
from ..poseio.wire import PoseMessage
from .config import PROTOCOL_VERSION, SessionConfig
from .engine import SessionEngine

log = logging.getLogger(__name__)

CLIENT_QUEUE_LIMIT = 64


class SessionServer:
    def __init__(self, config: SessionConfig):
        self.config = config.validate()
        self.engine = SessionEngine(config)
        self.clients: set[asyncio.Queue] = set()
        self.latest_frame_json: str | None = None
        self.latest_frame = None
        self.latency_samples: list[float] = []
        self.tick_intervals: list[float] = []
        self._udp_transport = None
        self._runner = None
        self._tick_task = None
        self.ingest_port = config.ingest_port
        self.serve_port = config.serve_port
        self._ingest_stats = None

    # -- lifecycle -------------------------------------------------------

    async def start(self):
        self._udp_transport, protocol = await open_ingest(
            self._on_pose, host=self.config.host, port=self.config.ingest_port
        )
        self._ingest_stats = protocol.stats
        self.ingest_port = self._udp_transport.get_extra_info("sockname")[1]

        app = web.Application()
        app.router.add_get("/ws", self._ws_handler)
        app.router.add_get("/", self._ws_or_index)
        app.router.add_post("/simulated-pose", self._simulated_pose)
        app.router.add_post("/what-if", self._what_if)
        app.router.add_get("/frame", self._get_frame)
        app.router.add_get("/config", self._get_config)
        app.router.add_get("/stats", self._get_stats)
        self._runner = web.AppRunner(app)
        await self._runner.setup()
        site = web.TCPSite(self._runner, self.config.host, self.config.serve_port)
        await site.start()
        self.serve_port = site._server.sockets[0].getsockname()[1]
        self._tick_task = asyncio.create_task(self._tick_loop())
        log.info("session serving ws on :%d, ingest udp on :%d",
                 self.serve_port, self.ingest_port)

    async def stop(self):
        if self._tick_task:
            self._tick_task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await self._tick_task
        if self._udp_transport:
            self._udp_transport.close()
        if self._runner:
            await self._runner.cleanup()

    async def __aenter__(self):
        await self.start()
        return self

    async def __aexit__(self, *exc):
        await self.stop()

    # -- intake ------------------------------------------------------------

    def _on_pose(self, msg: PoseMessage, recv_mono: float):
        self.engine.ingest(msg, recv_mono=recv_mono)

    # -- tick loop -----------------------------------------------------------

    async def _tick_loop(self):
        loop = asyncio.get_running_loop()
        period = 1.0 / self.config.tick_rate
        # frames are computed a few ms ahead of their deadline and released
        # exactly on it: compute-time variance then never shows up in the
        # inter-frame cadence, only scheduling precision does
        lead = min(0.0035, 0.3 * period)
        next_deadline = loop.time() + period
        last_broadcast = None
        while True:
            delay = (next_deadline - lead) - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            try:
                frame = self.engine.tick()
            except StaleEntityError:
                frame = None  # nothing valid yet
            except MirrorcastError as exc:
                log.warning("tick skipped: %s", exc)
                frame = None
            snapshot_recv = self.engine.store._newest_recv_mono
            while loop.time() < next_deadline:  # yielding spin to the release
                await asyncio.sleep(0)
            next_deadline += period
            if next_deadline < loop.time():  # fell behind; do not burst
                next_deadline = loop.time() + period
            if frame is None:
                continue
            now = time.monotonic()
            if snapshot_recv is not None and now - snapshot_recv < 1.0:
                self.latency_samples.append(now - snapshot_recv)
                del self.latency_samples[:-4096]
            if last_broadcast is not None:
                self.tick_intervals.append(now - last_broadcast)
                del self.tick_intervals[:-4096]
            last_broadcast = now
            self._broadcast(frame)

    def _broadcast(self, frame):
        payload = frame.to_json()
        self.latest_frame = frame
        self.latest_frame_json = payload
        dead = []
        for queue in self.clients:
            try:
                queue.put_nowait(payload)
            except asyncio.QueueFull:
                dead.append(queue)
        for queue in dead:
            self.clients.discard(queue)
            with contextlib.suppress(asyncio.QueueEmpty, asyncio.QueueFull):
                queue.get_nowait()  # make room for the poison pill
                queue.put_nowait(None)  # sender sees it and closes the socket

    # -- websocket -------------------------------------------------------------

    def _config_doc(self) -> str:
        return json.dumps(
            {"type": "config", "version": PROTOCOL_VERSION, "config": self.config.to_dict()},
            sort_keys=True, separators=(",", ":"),
        )

    async def _ws_or_index(self, request):
        if request.headers.get("Upgrade", "").lower() == "websocket":
            return await self._ws_handler(request)
        return web.json_response({"service": "mirrorcast", "version": PROTOCOL_VERSION,
                                  "websocket": "/ws"})

    async def _ws_handler(self, request):
        ws = web.WebSocketResponse(heartbeat=30)
        await ws.prepare(request)
        proto = request.query.get("proto")
        if proto is not None and proto != str(PROTOCOL_VERSION):
            await ws.send_str(json.dumps({
                "type": "error",
                "reason": f"protocol version {proto} unsupported, server speaks "
                          f"{PROTOCOL_VERSION}",
            }))
            await ws.close()
            return ws
        queue: asyncio.Queue = asyncio.Queue(maxsize=CLIENT_QUEUE_LIMIT)
        await ws.send_str(self._config_doc())
        if self.latest_frame_json is not None:
            await ws.send_str(self.latest_frame_json)
        self.clients.add(queue)
        sender = asyncio.create_task(self._client_sender(ws, queue))
        try:
            async for msg in ws:
                if msg.type == WSMsgType.TEXT and msg.data == "ping":
                    await ws.send_str('{"type":"pong"}')
                elif msg.type == WSMsgType.ERROR:
                    break
        finally:
            self.clients.discard(queue)
            sender.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await sender
        return ws

    async def _client_sender(self, ws, queue: asyncio.Queue):
        try:
            while True:
                payload = await queue.get()
                if payload is None:  # kicked for falling behind
                    await ws.close()
                    return
                await ws.send_str(payload)
        except (ConnectionResetError, RuntimeError):
            pass

    # -- http -----------------------------------------------------------------

    async def _simulated_pose(self, request):
        try:
            doc = await request.json()
        except json.JSONDecodeError as exc:
            return web.json_response({"ok": False, "reason": f"invalid JSON: {exc}"},
                                     status=400)
        docs = doc if isinstance(doc, list) else [doc]
        accepted = 0
        now = time.monotonic()
        try:
            for item in docs:
                self.engine.ingest(PoseMessage.from_json_dict(item), recv_mono=now)
                accepted += 1
        except (WireFormatError, KeyError, TypeError, ValueError) as exc:
            return web.json_response(
                {"ok": False, "reason": str(exc), "accepted": accepted}, status=400
            )
        return web.json_response({"ok": True, "accepted": accepted})

    async def _what_if(self, request):
        try:
            doc = await request.json()
        except json.JSONDecodeError as exc:
            return web.json_response({"ok": False, "reason": f"invalid JSON: {exc}"},
                                     status=400)
        overrides = {}
        try:
            for key, value in (doc.get("poses") or {}).items():
                overrides[Entity(key)] = np.asarray(value, dtype=float)
            frame = self.engine.what_if(
                overrides=overrides,
                mirror_width=doc.get("mirror_width"),
                mirror_height=doc.get("mirror_height"),
                shape_variant=doc.get("shape_variant"),
            )
        except (MirrorcastError, ValueError) as exc:
            return web.json_response({"ok": False, "reason": str(exc)}, status=400)
        return web.json_response({"ok": True, "frame": frame.to_json_dict()})

    async def _get_frame(self, request):
        if self.latest_frame_json is None:
            return web.json_response({"ok": False, "reason": "no frame yet"}, status=503)
        return web.Response(text=self.latest_frame_json, content_type="application/json")

    async def _get_config(self, request):
        return web.Response(text=self._config_doc(), content_type="application/json")

    async def _get_stats(self, request):
        lat = sorted(self.latency_samples)
        ticks = sorted(self.tick_intervals)

        def pct(data, q):
            if not data:
                return None
            return data[min(len(data) - 1, int(q * len(data)))]

        return web.json_response({
            "clients": len(self.clients),
            "ticks": self.engine.tick_index,
            "latency_s": {"median": pct(lat, 0.5), "p90": pct(lat, 0.9),
                          "p99": pct(lat, 0.99), "n": len(lat)},
            "tick_interval_s": {"median": pct(ticks, 0.5), "p99": pct(ticks, 0.99),
                                "n": len(ticks)},
            "ingest": {
                "received": self._ingest_stats.received if self._ingest_stats else 0,
                "malformed": self._ingest_stats.malformed if self._ingest_stats else 0,
            },
            "smoother_dropped": self.engine.smoother.dropped,
        })


async def serve_forever(config: SessionConfig):
    """Run a session until cancelled (the CLI serve entry point)."""
    async with SessionServer(config) as server:
        log.info("mirrorcast session up: ws://%s:%d/ws", config.host, server.serve_port)
        await asyncio.Event().wait()
