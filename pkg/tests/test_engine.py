import math
from dataclasses import replace

import numpy as np
import pytest

from mirrorcast import frustum, geometry, silhouette
from mirrorcast.errors import BehindMirrorError, ConfigError, StaleEntityError
from mirrorcast.geometry import Entity, MirrorFrame, Pose, to_mirror_frame
from mirrorcast.poseio import PoseMessage, PoseTrace, TraceHeader
from mirrorcast.session import SessionConfig, SessionEngine
from mirrorcast.session.replay import digest_frames, replay_frames

US = 1_000_000


def q32(*xs):
    """Positions ride the wire as f32; oracles must see the same values."""
    return tuple(float(np.float32(x)) for x in xs)


def base_config(**kw):
    defaults = dict(
        mirror_width=1.0,
        mirror_height=0.6,
        deterministic=True,
        smoothing_tau=0.0,
        cap_to_eye=(0.0, 0.0, 0.0),
    )
    defaults.update(kw)
    return SessionConfig(**defaults)


def feed(engine, entity, pos, t_us, seq=0):
    engine.ingest(PoseMessage(entity, pos, timestamp_us=t_us, sequence=seq))


def feed_minimum(engine, t_us=0, viewer=(0.5, 0.3, 1.0), head=(0.4, 0.35, 1.2)):
    feed(engine, Entity.VIEWER, viewer, t_us)
    feed(engine, Entity.PLAYER_HEAD, head, t_us)


class TestTick:
    def test_static_poses_identical_geometry(self):
        engine = SessionEngine(base_config())
        feed_minimum(engine)
        frames = [engine.tick(now_us=t) for t in (0, 11_111, 22_222)]
        digests = {f.geometry_digest() for f in frames}
        assert len(digests) == 1
        assert [f.tick for f in frames] == [1, 2, 3]

    def test_matches_direct_geometry_calls(self):
        cfg = base_config()
        engine = SessionEngine(cfg)
        feed_minimum(engine, viewer=(0.2, 0.3, 1.5), head=(0.6, 0.4, 2.0))
        frame = engine.tick(now_us=0)

        mf = MirrorFrame.identity(1.0, 0.6)
        viewer = Pose(Entity.VIEWER, q32(0.2, 0.3, 1.5))
        head = Pose(Entity.PLAYER_HEAD, q32(0.6, 0.4, 2.0))
        feet = Pose(Entity.PLAYER_FEET, (*q32(0.6)[:1], 0.0, q32(2.0)[0]))
        assert np.allclose(frame.view, frustum.mirrored_view(viewer, mf), atol=1e-12)
        assert np.allclose(
            frame.projection,
            frustum.offaxis_projection(q32(0.2, 0.3, 1.5), mf, cfg.near, cfg.far),
            atol=1e-12,
        )
        box = silhouette.silhouette_anchor_box(head, feet, viewer, mf, cfg.body())
        poly = silhouette.build_polygon(box, cfg.shape(), mf)
        assert np.allclose(frame.polygon.outline, poly.outline, atol=1e-12)

    def test_viewer_step_right_shifts_blit_left(self):
        engine = SessionEngine(base_config(overscan=2.5))
        feed_minimum(engine, t_us=0)
        f0 = engine.tick(now_us=0)
        feed(engine, Entity.VIEWER, (1.0, 0.3, 1.0), 11_111)
        feed(engine, Entity.PLAYER_HEAD, (0.4, 0.35, 1.2), 11_111)
        f1 = engine.tick(now_us=11_111)
        assert f1.blit.u_min < f0.blit.u_min
        # silhouette anchor also moves; must match a direct solver call
        head_x, head_z = q32(0.4, 1.2)
        viewer = q32(1.0, 0.3, 1.0)
        s = geometry.solve_reflection_1d((head_x, head_z), (viewer[0], viewer[2])).s
        sh = 0.25
        lo = geometry.solve_reflection_1d((head_x - sh, head_z), (viewer[0], viewer[2])).s
        hi = geometry.solve_reflection_1d((head_x + sh, head_z), (viewer[0], viewer[2])).s
        outline_x = f1.polygon.outline[:, 0]
        assert outline_x.min() == pytest.approx(lo / 1.0, abs=1e-9)
        assert outline_x.max() == pytest.approx(hi / 1.0, abs=1e-9)
        assert lo < s < hi

    def test_player_removed_freezes_with_flag(self):
        engine = SessionEngine(base_config())
        feed_minimum(engine, t_us=0)
        live = engine.tick(now_us=0)
        assert live.frozen is False
        # 250 ms later the player pose exceeds the 200 ms window
        feed(engine, Entity.VIEWER, (0.5, 0.3, 1.0), 250_000)
        frozen = engine.tick(now_us=250_000)
        assert frozen.frozen is True
        assert frozen.stale["player_head"] is True
        assert frozen.geometry_digest() == live.geometry_digest()
        assert frozen.tick == live.tick + 1

    def test_no_frame_before_first_poses(self):
        engine = SessionEngine(base_config())
        with pytest.raises(StaleEntityError):
            engine.tick(now_us=0)

    def test_teleport_event_attached_once(self):
        engine = SessionEngine(base_config())
        feed_minimum(engine, t_us=0)
        engine.tick(now_us=0)
        feed(engine, Entity.VIEWER, (0.5, 0.3, 1.0), 11_111)
        feed(engine, Entity.PLAYER_HEAD, (5.4, 0.35, 1.2), 11_111)  # 5 m jump
        frame = engine.tick(now_us=11_111)
        teleports = [e for e in frame.events if e.kind.value == "teleport"]
        assert len(teleports) == 1
        assert teleports[0].magnitude == pytest.approx(5.0, abs=1e-5)
        # and the following tick carries none
        feed(engine, Entity.PLAYER_HEAD, (5.41, 0.35, 1.2), 22_222)
        assert not [e for e in engine.tick(now_us=22_222).events
                    if e.kind.value == "teleport"]

    def test_feet_fallback_projects_head_to_floor(self):
        engine = SessionEngine(base_config(floor_y=0.1))
        feed_minimum(engine, viewer=(0.5, 0.3, 1.0), head=(0.4, 0.5, 1.0))
        frame = engine.tick(now_us=0)
        # equal depths make the box bottom the midpoint of floor and viewer y
        expected_y_min = (0.1 + q32(0.3)[0]) / 2 / 0.6
        assert frame.polygon.outline[:, 1].min() == pytest.approx(expected_y_min, abs=1e-9)

    def test_behind_mirror_viewer_freezes_live_stream(self):
        engine = SessionEngine(base_config())
        feed_minimum(engine, t_us=0)
        live = engine.tick(now_us=0)
        feed(engine, Entity.VIEWER, (0.5, 0.3, -1.0), 11_111)
        feed(engine, Entity.PLAYER_HEAD, (0.4, 0.35, 1.2), 11_111)
        frame = engine.tick(now_us=11_111)
        assert frame.frozen is True
        assert frame.geometry_digest() == live.geometry_digest()

    def test_adaptive_opacity_applied_from_config(self):
        engine = SessionEngine(base_config(background_luminance=1.0, shape_opacity=0.6))
        feed_minimum(engine)
        frame = engine.tick(now_us=0)
        assert frame.polygon.opacity == pytest.approx(1.0)

    def test_insufficient_overscan_widens(self):
        engine = SessionEngine(base_config(overscan=1.0))
        feed_minimum(engine, viewer=(0.9, 0.3, 1.0))
        frame = engine.tick(now_us=0)
        assert frame.overscan > 1.0
        assert frame.blit.is_sub_rect()

    def test_offscreen_event_when_silhouette_outside(self):
        engine = SessionEngine(base_config())
        # player far to the side: reflection anchor lands off the glass
        feed_minimum(engine, viewer=(-4.0, 0.3, 0.2), head=(-4.2, 0.4, 4.0))
        frame = engine.tick(now_us=0)
        kinds = {e.kind.value for e in frame.events}
        assert "silhouette_offscreen" in kinds


class TestBodyWithArms:
    def test_capsules_when_controllers_fresh(self):
        engine = SessionEngine(base_config(shape_variant="body_with_arms"))
        feed_minimum(engine)
        feed(engine, Entity.CONTROLLER_LEFT, (0.1, 0.3, 1.2), 0)
        feed(engine, Entity.CONTROLLER_RIGHT, (0.7, 0.3, 1.2), 0)
        frame = engine.tick(now_us=0)
        assert len(frame.polygon.arm_capsules) == 2

    def test_no_capsules_when_controllers_missing(self):
        engine = SessionEngine(base_config(shape_variant="body_with_arms"))
        feed_minimum(engine)
        frame = engine.tick(now_us=0)
        assert frame.polygon.arm_capsules == ()


class TestWhatIf:
    def test_current_poses_match_current_frame_geometry(self):
        engine = SessionEngine(base_config())
        feed_minimum(engine)
        live = engine.tick(now_us=0)
        probe = engine.what_if()
        assert probe.geometry_digest() == live.geometry_digest()

    def test_screen_size_sweep_increases_fov(self):
        from mirrorcast.analysis import panel_dims
        engine = SessionEngine(base_config())
        feed_minimum(engine, viewer=(0.27, 0.15, 0.5), head=(0.3, 0.4, 1.0))
        engine.tick(now_us=0)
        w24, h24 = panel_dims(24)
        w50, h50 = panel_dims(50)
        f24 = engine.what_if(mirror_width=w24, mirror_height=h24)
        f50 = engine.what_if(mirror_width=w50, mirror_height=h50)
        assert f50.fov.h_fov_deg > f24.fov.h_fov_deg

    def test_behind_mirror_override_errors_and_leaves_live_alone(self):
        engine = SessionEngine(base_config())
        feed_minimum(engine)
        live = engine.tick(now_us=0)
        with pytest.raises(BehindMirrorError):
            engine.what_if(overrides={Entity.VIEWER: (0.5, 0.3, -2.0)})
        after = engine.tick(now_us=11_111)
        assert after.frozen is False
        assert after.geometry_digest() == live.geometry_digest()

    def test_override_does_not_disturb_state(self):
        engine = SessionEngine(base_config())
        feed_minimum(engine)
        engine.tick(now_us=0)
        engine.what_if(overrides={Entity.VIEWER: (0.9, 0.3, 0.4)})
        again = engine.what_if()
        live = engine.tick(now_us=11_111)
        assert again.geometry_digest() == live.geometry_digest()


class TestSnapshotAtomicity:
    def test_no_frame_mixes_concurrent_entangled_updates(self):
        """Writer hammers entangled viewer/player pairs while ticks run; every
        frame must equal the geometry of its own snapshot, never a blend."""
        import threading

        from mirrorcast.poseio.store import PoseStore

        engine = SessionEngine(base_config(smoothing_tau=0.0))

        captured = {}

        class RecordingStore(PoseStore):
            def snapshot(self, now_us):
                snap = super().snapshot(now_us)
                captured[now_us] = snap
                return snap

        recording = RecordingStore(window_us=engine.store.window_us)
        engine.store = recording

        stop = threading.Event()

        def writer():
            t = 0
            while not stop.is_set():
                t += 1
                v = 0.2 + 0.5 * ((t % 100) / 100)
                engine.ingest(PoseMessage(Entity.VIEWER, (v, 0.3, 1.0),
                                          timestamp_us=t * 1000, sequence=t))
                engine.ingest(PoseMessage(Entity.PLAYER_HEAD, (v, 0.35, 1.2),
                                          timestamp_us=t * 1000, sequence=t))

        thread = threading.Thread(target=writer, daemon=True)
        thread.start()
        try:
            frames = []
            deadline = 0
            while len(frames) < 200:
                deadline += 1000
                try:
                    frames.append((deadline, engine.tick(now_us=deadline)))
                except StaleEntityError:
                    continue
        finally:
            stop.set()
            thread.join(timeout=2)

        checked = 0
        for now_us, frame in frames:
            if frame.frozen:
                continue
            snap = captured[now_us]
            viewer = snap.poses[Entity.VIEWER]
            head = snap.poses[Entity.PLAYER_HEAD]
            mf = MirrorFrame.identity(1.0, 0.6)
            assert np.allclose(frame.view, frustum.mirrored_view(viewer, mf),
                               atol=1e-12)
            local = to_mirror_frame(viewer.position, mf)
            assert np.allclose(
                frame.projection,
                frustum.offaxis_projection(local, mf, engine.config.near,
                                           engine.config.far),
                atol=1e-12)
            # the polygon must come from the same snapshot's player pose
            feet = Pose(Entity.PLAYER_FEET,
                        (head.position[0], 0.0, head.position[2]))
            box = silhouette.silhouette_anchor_box(
                head, feet, viewer, mf, engine.config.body())
            poly = silhouette.build_polygon(box, engine.config.shape(), mf)
            assert np.allclose(frame.polygon.outline, poly.outline, atol=1e-12)
            checked += 1
        assert checked > 100


def make_trace(n_ticks=60, tick_rate=90.0):
    header = TraceHeader(
        mirror_width=1.0, mirror_height=0.6,
        body={"shoulder_half_width": 0.25, "head_radius": 0.12, "arm_radius": 0.06},
    )
    period = round(US / tick_rate)
    msgs = []
    for i in range(n_ticks):
        t = i * period
        phase = i / n_ticks * 2 * math.pi
        msgs.append(PoseMessage(Entity.VIEWER, (0.5 + 0.2 * math.sin(phase), 0.3, 1.0),
                                timestamp_us=t, sequence=i))
        msgs.append(PoseMessage(Entity.PLAYER_HEAD, (0.4, 0.35 + 0.02 * math.cos(phase), 1.2),
                                timestamp_us=t, sequence=i))
    return PoseTrace(header=header, messages=msgs)


class TestDeterministicReplay:
    def test_three_runs_bit_identical(self):
        trace = make_trace()
        cfg = base_config()
        digests = {digest_frames(replay_frames(trace, cfg)) for _ in range(3)}
        assert len(digests) == 1

    def test_header_mismatch_refused(self):
        from mirrorcast.errors import TraceHeaderMismatchError
        trace = make_trace()
        with pytest.raises(TraceHeaderMismatchError) as exc:
            replay_frames(trace, base_config(mirror_width=2.0))
        assert "mirror_width" in exc.value.diff

    def test_frame_count_tracks_trace_duration(self):
        trace = make_trace(n_ticks=45)
        frames = replay_frames(trace, base_config())
        assert len(frames) == 45
        assert [f.tick for f in frames] == list(range(1, 46))


class TestConfig:
    def test_round_trip_file(self, tmp_path):
        cfg = base_config(tick_rate=120.0)
        path = tmp_path / "c.json"
        cfg.save(path)
        again = SessionConfig.from_file(path)
        assert again == cfg

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError) as exc:
            SessionConfig.from_dict({"tick_rte": 90})
        assert "tick_rte" in str(exc.value)

    def test_bad_tick_rate_named(self):
        with pytest.raises(ConfigError) as exc:
            SessionConfig(tick_rate=500).validate()
        assert "tick_rate" in str(exc.value)

    def test_bad_variant_named(self):
        with pytest.raises(ConfigError) as exc:
            SessionConfig(shape_variant="blob").validate()
        assert "shape_variant" in str(exc.value)

    def test_shape_presets_fill_defaults(self):
        cfg = SessionConfig(shape_variant="narrow_oval")
        assert cfg.shape().width_scale == 0.5
        cfg2 = SessionConfig(shape_variant="transparent_oval")
        assert cfg2.shape().opacity == 0.5
