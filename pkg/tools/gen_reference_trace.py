#!/usr/bin/env python3
"""Regenerate the bundled reference trace, example config and golden digest.

Deterministic by construction: fixed seed, fixed timeline. Run from the
repository root:

    python3 tools/gen_reference_trace.py
"""

import math
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

import numpy as np

from mirrorcast import quat
from mirrorcast.geometry import Entity
from mirrorcast.poseio import PoseMessage, PoseTrace, TraceHeader
from mirrorcast.session import SessionConfig
from mirrorcast.session.replay import digest_frames, replay_frames

RATE = 90.0
DURATION_S = 6.0
US = 1_000_000


def make_messages():
    period = round(US / RATE)
    n = int(DURATION_S * RATE)
    msgs = []
    rng = np.random.default_rng(4119)
    for i in range(n):
        t = i * period
        phase = 2 * math.pi * i / n

        viewer = (
            0.27 + 0.35 * math.sin(phase),
            1.55 + 0.05 * math.sin(3 * phase),
            0.8 + 0.45 * math.cos(phase) ** 2,
        )
        head = (
            0.27 + 0.5 * math.sin(phase / 2),
            1.72 + 0.02 * math.sin(9 * phase),
            1.6 + 0.3 * math.sin(phase),
        )
        feet = (head[0], 0.02, head[2])
        swing = 0.4 * math.sin(5 * phase)
        left = (head[0] - 0.3, 1.1 + swing * 0.2, head[2] + swing)
        right = (head[0] + 0.3, 1.1 - swing * 0.2, head[2] - swing)
        yaw = quat.from_axis_angle([0, 1, 0], 0.2 * math.sin(phase))

        for entity, pos, q in (
            (Entity.VIEWER, viewer, yaw),
            (Entity.PLAYER_HEAD, head, quat.IDENTITY),
            (Entity.PLAYER_FEET, feet, quat.IDENTITY),
            (Entity.CONTROLLER_LEFT, left, quat.IDENTITY),
            (Entity.CONTROLLER_RIGHT, right, quat.IDENTITY),
        ):
            msgs.append(
                PoseMessage(
                    entity=entity,
                    position=pos,
                    orientation=tuple(q),
                    timestamp_us=t,
                    sequence=i,
                    sender_id=1,
                )
            )
    return msgs


def main():
    config = SessionConfig()
    config.save(ROOT / "configs" / "example.json")

    header = TraceHeader(
        mirror_width=config.mirror_width,
        mirror_height=config.mirror_height,
        body={
            "shoulder_half_width": config.shoulder_half_width,
            "head_radius": config.head_radius,
            "arm_radius": config.arm_radius,
        },
        start_epoch_us=0,
    )
    trace = PoseTrace(header=header, messages=make_messages())
    trace_path = ROOT / "traces" / "reference.posetrace"
    trace.save(trace_path)

    frames = replay_frames(trace, config)
    digest = digest_frames(frames)
    (ROOT / "traces" / "reference.digest").write_text(digest + "\n")
    print(f"wrote {trace_path} ({len(trace.messages)} messages)")
    print(f"frames: {len(frames)}, digest: {digest}")


if __name__ == "__main__":
    main()
