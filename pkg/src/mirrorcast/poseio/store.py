"""Latest-pose snapshots and time-interpolated sampling.

A single writer per entity appends; readers grab the current snapshot
reference without blocking anyone (the latest-pose map is replaced wholesale
on every write, never mutated in place).
"""

import bisect
from dataclasses import dataclass, field

import numpy as np

from .. import quat
from ..errors import StaleEntityError
from ..geometry import Entity, Pose

DEFAULT_WINDOW_US = 200_000  # beyond this an entity is stale, never extrapolated


@dataclass(frozen=True)
class Snapshot:
    """Consistent point-in-time view of all tracked entities."""

    poses: dict
    stale: dict
    taken_at_us: int
    newest_recv_mono: float | None = None


class PoseStore:
    def __init__(self, window_us: int = DEFAULT_WINDOW_US, keep: int = 2048):
        self.window_us = window_us
        self.keep = keep
        self._latest: dict[Entity, Pose] = {}
        self._seen_at: dict[Entity, int] = {}
        self._history: dict[Entity, list] = {}
        self._newest_recv_mono: float | None = None

    def append(self, pose: Pose, seen_at_us: int | None = None,
               recv_mono: float | None = None):
        """Record a pose; samples older than the entity's newest are dropped.

        ``seen_at_us`` is the session-clock arrival time used for staleness
        (defaults to the pose's own timestamp); ``recv_mono`` is an optional
        wall-clock monotonic arrival time kept for latency statistics only.
        """
        history = self._history.setdefault(pose.entity, [])
        if history and pose.timestamp_us < history[-1].timestamp_us:
            return False
        history.append(pose)
        if len(history) > self.keep:
            del history[: len(history) - self.keep]
        self._latest = {**self._latest, pose.entity: pose}
        self._seen_at = {
            **self._seen_at,
            pose.entity: pose.timestamp_us if seen_at_us is None else int(seen_at_us),
        }
        if recv_mono is not None:
            self._newest_recv_mono = recv_mono
        return True

    def latest(self, entity: Entity) -> Pose | None:
        return self._latest.get(entity)

    def entities(self):
        return set(self._latest)

    def snapshot(self, now_us: int) -> Snapshot:
        poses = self._latest  # atomic reference grab; map is never mutated
        seen_at = self._seen_at
        stale = {
            entity: (now_us - seen_at.get(entity, -(1 << 62))) > self.window_us
            for entity in poses
        }
        return Snapshot(
            poses=dict(poses),
            stale=stale,
            taken_at_us=now_us,
            newest_recv_mono=self._newest_recv_mono,
        )

    def sample_at(self, t_us: int, entities=None) -> dict:
        """Interpolated pose of every requested entity at time ``t_us``.

        Positions are interpolated linearly, orientations spherically; the
        result is exact at sample timestamps. Entities with no sample within
        the staleness window of ``t_us`` raise, listed by name.
        """
        wanted = list(entities) if entities is not None else sorted(
            self._history, key=lambda e: e.value
        )
        out = {}
        missing = []
        for entity in wanted:
            history = self._history.get(entity, [])
            pose = _interpolate(history, t_us, self.window_us)
            if pose is None:
                missing.append(entity.value)
            else:
                out[entity] = pose
        if missing:
            raise StaleEntityError(
                f"stale entities at t={t_us}: {', '.join(missing)}", entities=missing
            )
        return out


def _interpolate(history: list, t_us: int, window_us: int) -> Pose | None:
    if not history:
        return None
    times = [p.timestamp_us for p in history]
    i = bisect.bisect_left(times, t_us)
    if i < len(history) and times[i] == t_us:
        return history[i]
    if i == 0:
        first = history[0]
        if first.timestamp_us - t_us > window_us:
            return None
        return Pose(first.entity, first.position, first.orientation, t_us)
    if i == len(history):
        last = history[-1]
        if t_us - last.timestamp_us > window_us:
            return None
        return Pose(last.entity, last.position, last.orientation, t_us)
    a, b = history[i - 1], history[i]
    u = (t_us - a.timestamp_us) / (b.timestamp_us - a.timestamp_us)
    return Pose(
        entity=a.entity,
        position=(1 - u) * a.position + u * b.position,
        orientation=quat.slerp(a.orientation, b.orientation, u),
        timestamp_us=t_us,
    )
