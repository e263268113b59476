"""Command line entry point.

Exit codes: 0 success, 1 usage error, 2 configuration error, 3 runtime
failure. Every subcommand honors ``--json`` by printing a single JSON
document on stdout.
"""

import argparse
import asyncio
import contextlib
import csv
import json
import logging
import socket
import sys
import time

from .analysis import EventKind, silhouette_coverage
from .errors import ConfigError, MirrorcastError
from .poseio import PoseTrace, TraceHeader, TraceRecorder, encode
from .poseio.ingest import open_ingest
from .session import SessionConfig, serve_forever
from .session.replay import digest_frames, replay_frames
from .selftest import run_selftest

log = logging.getLogger(__name__)


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n\n{self.format_usage()}")


def build_parser() -> Parser:
    parser = Parser(prog="mirrorcast",
                    description="one-way-mirror spectator geometry service")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add_config_flags(p, ports=True):
        p.add_argument("--config", help="JSON config file")
        if ports:
            p.add_argument("--port-ingest", type=int, help="UDP tracker port")
            p.add_argument("--port-serve", type=int, help="WebSocket/HTTP port")
        p.add_argument("--tick-rate", type=float, help="frames per second")
        p.add_argument("--shape", help="silhouette variant")
        p.add_argument("--deterministic", action="store_true", default=None)

    p_serve = sub.add_parser("serve", help="run a live session")
    add_config_flags(p_serve)

    p_replay = sub.add_parser("replay", help="recompute frames from a trace")
    p_replay.add_argument("trace", help=".posetrace file")
    add_config_flags(p_replay, ports=False)
    p_replay.add_argument("--speed", type=float, default=1.0,
                          help="timeline scale when streaming with --to")
    p_replay.add_argument("--to", metavar="HOST:PORT",
                          help="stream messages to a live ingest port instead")

    p_record = sub.add_parser("record", help="capture tracker input to a trace")
    p_record.add_argument("--out", required=True, help="output .posetrace path")
    add_config_flags(p_record)
    p_record.add_argument("--duration", type=float, default=None,
                          help="stop after this many seconds")

    p_analyze = sub.add_parser("analyze", help="FOV and event report from a trace")
    p_analyze.add_argument("trace", help=".posetrace file")
    add_config_flags(p_analyze, ports=False)
    p_analyze.add_argument("--csv", help="write per-frame rows to this file")

    p_validate = sub.add_parser("validate", help="check a config file")
    p_validate.add_argument("--config", required=True)

    p_selftest = sub.add_parser("selftest", help="run the built-in oracle checks")

    return parser


def load_config(args) -> SessionConfig:
    cfg = SessionConfig.from_file(args.config) if getattr(args, "config", None) \
        else SessionConfig()
    overrides = {
        "ingest_port": getattr(args, "port_ingest", None),
        "serve_port": getattr(args, "port_serve", None),
        "tick_rate": getattr(args, "tick_rate", None),
        "shape_variant": getattr(args, "shape", None),
        "deterministic": getattr(args, "deterministic", None),
    }
    doc = cfg.to_dict()
    doc.update({k: v for k, v in overrides.items() if v is not None})
    return SessionConfig.from_dict(doc)


def emit(args, doc: dict, text: str):
    if args.json:
        print(json.dumps(doc, sort_keys=True))
    else:
        print(text)


def cmd_serve(args) -> int:
    config = load_config(args)
    if args.json:
        print(json.dumps({"ok": True, "serving": True,
                          "ingest_port": config.ingest_port,
                          "serve_port": config.serve_port}, sort_keys=True), flush=True)
    else:
        print(f"serving ws://{config.host}:{config.serve_port}/ws "
              f"(tracker ingest udp :{config.ingest_port}); Ctrl-C stops", flush=True)
    with contextlib.suppress(KeyboardInterrupt):
        asyncio.run(serve_forever(config))
    return 0


def cmd_replay(args) -> int:
    config = load_config(args)
    trace = PoseTrace.load(args.trace)
    if args.to:
        host, _, port = args.to.rpartition(":")
        targets = (host or "127.0.0.1", int(port))
        with socket.socket(socket.AF_INET, socket.SOCK_DGRAM) as sock:
            start = time.monotonic()
            sent = 0
            for offset, msg in trace.schedule(args.speed):
                delay = start + offset - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
                sock.sendto(encode(msg), targets)
                sent += 1
        emit(args, {"ok": True, "streamed": sent, "to": args.to},
             f"streamed {sent} messages to {args.to}")
        return 0
    frames = replay_frames(trace, config)
    digest = digest_frames(frames)
    teleports = sum(
        1 for f in frames for e in f.events if e.kind is EventKind.TELEPORT
    )
    emit(
        args,
        {"ok": True, "frames": len(frames), "digest": digest,
         "messages": len(trace.messages), "teleports": teleports},
        f"{len(frames)} frames from {len(trace.messages)} messages\n"
        f"digest {digest}\nteleport events: {teleports}",
    )
    return 0


def cmd_record(args) -> int:
    config = load_config(args)
    header = TraceHeader(
        mirror_width=config.mirror_width,
        mirror_height=config.mirror_height,
        body={
            "shoulder_half_width": config.shoulder_half_width,
            "head_radius": config.head_radius,
            "arm_radius": config.arm_radius,
        },
        start_epoch_us=int(time.time() * 1e6),
    )

    async def run():
        with TraceRecorder(args.out, header) as recorder:
            transport, _ = await open_ingest(
                lambda msg, mono: recorder.append(msg),
                host=config.host, port=config.ingest_port,
            )
            port = transport.get_extra_info("sockname")[1]
            print(f"recording udp :{port} -> {args.out}; Ctrl-C stops", flush=True)
            try:
                if args.duration:
                    await asyncio.sleep(args.duration)
                else:
                    await asyncio.Event().wait()
            finally:
                transport.close()
        return recorder.count

    try:
        count = asyncio.run(run())
    except KeyboardInterrupt:
        count = None
    emit(args, {"ok": True, "out": args.out, "messages": count},
         f"recorded {count if count is not None else 'some'} messages to {args.out}")
    return 0


def cmd_analyze(args) -> int:
    config = load_config(args)
    trace = PoseTrace.load(args.trace)
    frames = replay_frames(trace, config)
    if not frames:
        emit(args, {"ok": False, "reason": "trace produced no frames"},
             "trace produced no frames")
        return 3
    rows = []
    events = []
    for frame in frames:
        coverage = silhouette_coverage(frame.polygon)
        rows.append({
            "tick": frame.tick,
            "t_us": frame.timestamp_us,
            "h_fov_deg": frame.fov.h_fov_deg if frame.fov else None,
            "v_fov_deg": frame.fov.v_fov_deg if frame.fov else None,
            "coverage": coverage.coverage,
            "overflow": coverage.overflow,
            "frozen": frame.frozen,
        })
        events.extend(e.to_dict() for e in frame.events)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    h_fovs = [r["h_fov_deg"] for r in rows if r["h_fov_deg"] is not None]
    summary = {
        "ok": True,
        "frames": len(frames),
        "fov": {
            "h_min_deg": min(h_fovs),
            "h_max_deg": max(h_fovs),
            "h_mean_deg": sum(h_fovs) / len(h_fovs),
        },
        "coverage_mean": sum(r["coverage"] for r in rows) / len(rows),
        "events": events,
        "csv": args.csv,
    }
    emit(args, summary,
         f"{summary['frames']} frames; hFOV {summary['fov']['h_min_deg']:.2f}"
         f"-{summary['fov']['h_max_deg']:.2f} deg "
         f"(mean {summary['fov']['h_mean_deg']:.2f}); "
         f"mean coverage {summary['coverage_mean']:.3f}; "
         f"{len(events)} events" + (f"; rows -> {args.csv}" if args.csv else ""))
    return 0


def cmd_validate(args) -> int:
    config = SessionConfig.from_file(args.config)
    emit(args, {"ok": True, "config": config.to_dict()}, f"{args.config}: config OK")
    return 0


def cmd_selftest(args) -> int:
    results = run_selftest()
    if args.json:
        print(json.dumps({
            "ok": all(r.passed for r in results),
            "checks": [{"name": r.name, "passed": r.passed, "detail": r.detail}
                       for r in results],
        }, sort_keys=True))
    else:
        for r in results:
            print(r.line())
        print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return 0 if all(r.passed for r in results) else 3


COMMANDS = {
    "serve": cmd_serve,
    "replay": cmd_replay,
    "record": cmd_record,
    "analyze": cmd_analyze,
    "validate": cmd_validate,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if not args.command:
        print(parser.format_help(), file=sys.stderr)
        return 1
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        _fail(args, f"config error: {exc}")
        return 2
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (MirrorcastError, OSError) as exc:
        if args.verbose:
            log.exception("runtime failure")
        _fail(args, f"runtime failure: {exc}")
        return 3


def _fail(args, message: str):
    if args.json:
        print(json.dumps({"ok": False, "reason": message}, sort_keys=True))
    print(message, file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
