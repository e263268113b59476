"""Per-tick orchestration: poses in, FrameUpdate out.

Each tick consumes one consistent pose snapshot; when a mandatory entity is
stale the last valid geometry is repeated with a flag (a frozen window beats
a black screen) and nothing is ever mixed across snapshots.
"""

import time

import numpy as np

from .. import analysis, frustum, quat, silhouette
from ..errors import BehindMirrorError, InsufficientOverscanError, StaleEntityError
from ..geometry import Entity, Pose, mirror_frame_from_pose, to_mirror_frame
from ..poseio import PoseSmoother, PoseStore
from ..poseio.wire import PoseMessage
from .config import SessionConfig
from .frames import FrameUpdate

MANDATORY = (Entity.VIEWER, Entity.PLAYER_HEAD)


class SessionEngine:
    """Owns the session clock, pose intake and frame composition."""

    def __init__(self, config: SessionConfig):
        self.config = config.validate()
        self.smoother = PoseSmoother(tau=config.smoothing_tau)
        self.store = PoseStore(window_us=int(config.staleness_window_s * 1e6))
        self.tick_index = 0
        self._start_mono_ns = time.monotonic_ns()
        self._det_now_us = 0
        self._last_geometry: FrameUpdate | None = None
        self._prev_head: tuple | None = None  # raw (position, timestamp_us)
        self._pending_events: list = []

    # -- session clock -------------------------------------------------------

    def now_us(self) -> int:
        if self.config.deterministic:
            return self._det_now_us
        return (time.monotonic_ns() - self._start_mono_ns) // 1000

    def advance_to(self, t_us: int):
        """Deterministic-mode clock control (replay harnesses)."""
        self._det_now_us = max(self._det_now_us, int(t_us))

    # -- intake ---------------------------------------------------------------

    def ingest(self, msg: PoseMessage, recv_mono: float | None = None):
        """Smooth and store one pose message; detects raw teleport jumps."""
        if self.config.deterministic:
            self.advance_to(msg.timestamp_us)
        if msg.entity is Entity.PLAYER_HEAD:
            self._detect_teleport(msg)
        pose = self.smoother.smooth(msg)
        self.store.append(pose, seen_at_us=self.now_us(), recv_mono=recv_mono)

    def _detect_teleport(self, msg: PoseMessage):
        # raw positions: smoothing would smear one jump over several ticks
        pos = np.array(msg.position, dtype=float)
        if self._prev_head is not None:
            prev_pos, prev_t = self._prev_head
            dt = (msg.timestamp_us - prev_t) * 1e-6
            if dt > 0:
                flag = analysis.detect_teleport(
                    prev_pos, pos, dt, threshold=self.config.teleport_threshold
                )
                if flag is not None:
                    self._pending_events.append(flag)
        self._prev_head = (pos, msg.timestamp_us)

    # -- frame composition ----------------------------------------------------

    def mirror_frame(self, snapshot):
        """Live tracker pose wins over the configured static placement.

        A stale mirror keeps its last pose: untracked mirrors do not move.
        """
        pose = snapshot.poses.get(Entity.MIRROR)
        if pose is None:
            return self.config.static_mirror_frame()
        return mirror_frame_from_pose(
            pose, self.config.mount_offset(), self.config.mirror_width,
            self.config.mirror_height,
        )

    def eye_position(self, viewer: Pose) -> np.ndarray:
        return viewer.position + quat.rotate(
            viewer.orientation, np.asarray(self.config.cap_to_eye, dtype=float)
        )

    def tick(self, now_us: int | None = None) -> FrameUpdate:
        """Compose and remember the next live frame."""
        t = self.now_us() if now_us is None else int(now_us)
        if self.config.deterministic and now_us is not None:
            self.advance_to(t)
        snapshot = self.store.snapshot(t)
        self.tick_index += 1
        events = tuple(
            analysis.EventFlag(e.kind, tick=self.tick_index, magnitude=e.magnitude)
            for e in self._pending_events
        )
        self._pending_events.clear()
        frame = self._compose(snapshot, self.tick_index, t, events)
        if not frame.frozen:
            self._last_geometry = frame
        return frame

    def what_if(self, overrides: dict | None = None, mirror_width: float | None = None,
                mirror_height: float | None = None,
                shape_variant: str | None = None) -> FrameUpdate:
        """Pure evaluation against the current snapshot plus overrides.

        Leaves every piece of live session state untouched; raises the same
        errors as a live tick would for invalid poses.
        """
        t = self.now_us()
        snapshot = self.store.snapshot(t)
        poses = dict(snapshot.poses)
        stale = dict(snapshot.stale)
        for entity, pose in (overrides or {}).items():
            entity = Entity(entity)
            poses[entity] = pose if isinstance(pose, Pose) else Pose(
                entity=entity, position=np.asarray(pose, dtype=float)
            )
            stale[entity] = False
        snap = type(snapshot)(poses=poses, stale=stale, taken_at_us=t,
                              newest_recv_mono=None)
        return self._compose(
            snap, tick=self.tick_index, t_us=t, events=(), strict=True,
            mirror_width=mirror_width, mirror_height=mirror_height,
            shape_variant=shape_variant,
        )

    def _compose(self, snapshot, tick: int, t_us: int, events: tuple,
                 strict: bool = False, mirror_width: float | None = None,
                 mirror_height: float | None = None,
                 shape_variant: str | None = None) -> FrameUpdate:
        cfg = self.config
        if shape_variant is not None:
            from dataclasses import replace
            cfg = replace(cfg, shape_variant=shape_variant,
                          shape_opacity=None, shape_width_scale=None).validate()
        stale_flags = {
            e.value: bool(snapshot.stale.get(e, True)) for e in Entity
        }
        missing = [
            e.value for e in MANDATORY
            if e not in snapshot.poses or snapshot.stale.get(e, True)
        ]
        if missing:
            if strict or self._last_geometry is None:
                raise StaleEntityError(
                    f"mandatory entities stale at t={t_us}: {', '.join(missing)}",
                    entities=missing,
                )
            return self._frozen(tick, t_us, stale_flags, events)

        frame = self.mirror_frame(snapshot)
        if mirror_width is not None or mirror_height is not None:
            frame = type(frame)(
                origin=frame.origin, basis=frame.basis,
                width=mirror_width if mirror_width is not None else frame.width,
                height=mirror_height if mirror_height is not None else frame.height,
            )

        viewer = snapshot.poses[Entity.VIEWER]
        head = snapshot.poses[Entity.PLAYER_HEAD]
        eye_world = self.eye_position(viewer)
        eye_pose = Pose(Entity.VIEWER, eye_world, viewer.orientation, viewer.timestamp_us)
        eye_local = to_mirror_frame(eye_world, frame)

        try:
            view = frustum.mirrored_view(eye_pose, frame)
            projection = frustum.offaxis_projection(eye_local, frame, cfg.near, cfg.far)
            clip = frustum.oblique_near_clip(view, frame)
            overscan = cfg.overscan
            try:
                blit = frustum.blit_rectangle(eye_local, frame, overscan)
            except InsufficientOverscanError as exc:
                # widen just enough instead of dropping the frame
                overscan = exc.required * 1.001
                blit = frustum.blit_rectangle(eye_local, frame, overscan)
            polygon = self._polygon(snapshot, head, eye_pose, frame, cfg)
            fov = analysis.fov_report(eye_local, frame.width, frame.height)
        except BehindMirrorError:
            if strict or self._last_geometry is None:
                raise
            return self._frozen(tick, t_us, stale_flags, events)

        coverage = analysis.silhouette_coverage(polygon)
        if coverage.coverage == 0.0:
            events = events + (
                analysis.EventFlag(
                    analysis.EventKind.SILHOUETTE_OFFSCREEN, tick=tick,
                    magnitude=coverage.overflow,
                ),
            )

        return FrameUpdate(
            tick=tick,
            timestamp_us=t_us,
            view=view,
            projection=projection,
            oblique_clip=clip,
            blit=blit,
            overscan=overscan,
            polygon=polygon,
            stale=stale_flags,
            events=events,
            fov=fov,
            frozen=False,
            mirror_width=frame.width,
            mirror_height=frame.height,
        ).validate()

    def _polygon(self, snapshot, head: Pose, eye_pose: Pose, frame, cfg=None):
        cfg = cfg if cfg is not None else self.config
        body = cfg.body()
        shape = cfg.shape()
        if cfg.background_luminance is not None:
            shape = silhouette.SilhouetteShape(
                variant=shape.variant,
                opacity=silhouette.adaptive_opacity(shape, cfg.background_luminance),
                width_scale=shape.width_scale,
            )
        feet = snapshot.poses.get(Entity.PLAYER_FEET)
        if feet is None or snapshot.stale.get(Entity.PLAYER_FEET, True):
            # no foot tracker: project the head to the configured floor height
            feet = Pose(
                Entity.PLAYER_FEET,
                np.array([head.position[0], cfg.floor_y, head.position[2]]),
                timestamp_us=head.timestamp_us,
            )
        box = silhouette.silhouette_anchor_box(head, feet, eye_pose, frame, body)
        polygon = silhouette.build_polygon(box, shape, frame)
        if shape.variant is silhouette.ShapeVariant.BODY_WITH_ARMS:
            left = snapshot.poses.get(Entity.CONTROLLER_LEFT)
            right = snapshot.poses.get(Entity.CONTROLLER_RIGHT)
            fresh = (
                left is not None and not snapshot.stale.get(Entity.CONTROLLER_LEFT, True)
                and right is not None
                and not snapshot.stale.get(Entity.CONTROLLER_RIGHT, True)
            )
            if fresh:
                capsules = silhouette.arm_capsules(left, right, head, eye_pose, frame, body)
                polygon = silhouette.SilhouettePolygon(
                    outline=polygon.outline, opacity=polygon.opacity,
                    arm_capsules=capsules, variant=polygon.variant,
                )
        return polygon

    def _frozen(self, tick: int, t_us: int, stale_flags: dict, events: tuple) -> FrameUpdate:
        last = self._last_geometry
        return FrameUpdate(
            tick=tick,
            timestamp_us=t_us,
            view=last.view,
            projection=last.projection,
            oblique_clip=last.oblique_clip,
            blit=last.blit,
            overscan=last.overscan,
            polygon=last.polygon,
            stale=stale_flags,
            events=events,
            fov=last.fov,
            frozen=True,
            mirror_width=last.mirror_width,
            mirror_height=last.mirror_height,
        )
