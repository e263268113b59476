import math

import numpy as np
import pytest

from mirrorcast.errors import BehindMirrorError, InsufficientOverscanError
from mirrorcast.frustum import (
    Rect,
    blit_rectangle,
    eye_view,
    mirrored_view,
    oblique_near_clip,
    offaxis_projection,
    project_ndc,
    render_params,
    required_overscan,
    texture_projection,
)
from mirrorcast.geometry import (
    Entity,
    MirrorFrame,
    from_mirror_frame,
    reflection_matrix,
    to_mirror_frame,
)

from .conftest import make_pose, random_frame

PANEL_24 = (0.5313124474311252, 0.29886325168000794)  # 24" 16:9, meters


def hfov_from_projection(proj, near):
    left = near * (proj[0, 2] - 1) / proj[0, 0]
    right = near * (proj[0, 2] + 1) / proj[0, 0]
    return math.degrees(math.atan(right / near) - math.atan(left / near))


class TestMirroredView:
    def test_axial_glass_point_depth(self):
        f = MirrorFrame.identity(0.6, 0.4)
        viewer = make_pose(pos=(0.3, 0.2, 1.0))
        v = mirrored_view(viewer, f)
        cam = v @ np.array([0.3, 0.2, 0.0, 1.0])
        assert cam[3] == pytest.approx(1.0)
        # camera looks along -z; the glass center sits 1 m in front
        assert np.allclose(cam[:3], [0, 0, -1.0], atol=1e-12)

    def test_double_reflection_returns_plain_camera(self, rng):
        f = random_frame(rng)
        eye = from_mirror_frame([0.1, 0.2, 1.3], f)
        viewer = make_pose(pos=eye)
        v_m = mirrored_view(viewer, f)
        assert np.allclose(v_m @ reflection_matrix(f), eye_view(eye, f), atol=1e-12)

    def test_equivalence_with_reflected_points(self, rng):
        f = random_frame(rng)
        eye = from_mirror_frame([0.3 * f.width, 0.6 * f.height, 0.9], f)
        viewer = make_pose(pos=eye)
        v_m = mirrored_view(viewer, f)
        v_plain = eye_view(eye, f)
        refl = reflection_matrix(f)
        proj = offaxis_projection(to_mirror_frame(eye, f), f)
        for _ in range(2000):
            q_local = np.array(
                [rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0.05, 6)]
            )
            q = from_mirror_frame(q_local, f)
            q_reflected = (refl @ np.append(q, 1.0))[:3]
            a = project_ndc(proj, v_m, q)
            b = project_ndc(proj, v_plain, q_reflected)
            assert np.allclose(a, b, atol=1e-9)

    def test_view_det_is_minus_one(self, rng):
        f = random_frame(rng)
        viewer = make_pose(pos=from_mirror_frame([0.1, 0.1, 0.5], f))
        v = mirrored_view(viewer, f)
        assert abs(np.linalg.det(v[:3, :3]) + 1.0) < 1e-9

    def test_behind_mirror_viewer_rejected(self):
        f = MirrorFrame.identity(1, 1)
        with pytest.raises(BehindMirrorError):
            mirrored_view(make_pose(pos=(0.5, 0.5, -0.2)), f)


class TestOffaxisProjection:
    def test_half_width_distance_gives_90_degrees(self):
        f = MirrorFrame.identity(1.0, 1.0)
        proj = offaxis_projection([0.5, 0.5, 0.5], f)
        assert hfov_from_projection(proj, 0.05) == pytest.approx(90.0, abs=1e-9)

    def test_24_inch_panel_at_half_meter(self):
        w, h = PANEL_24
        f = MirrorFrame.identity(w, h)
        proj = offaxis_projection([w / 2, h / 2, 0.5], f)
        expected = math.degrees(2 * math.atan(w / 2 / 0.5))
        assert hfov_from_projection(proj, 0.05) == pytest.approx(expected, abs=1e-9)
        assert expected == pytest.approx(55.96, abs=0.01)

    def test_corner_pinning_random_viewers(self, rng):
        for _ in range(50):
            f = random_frame(rng)
            e_local = np.array(
                [
                    rng.uniform(-f.width, 2 * f.width),
                    rng.uniform(-f.height, 2 * f.height),
                    rng.uniform(0.05, 4.0),
                ]
            )
            eye = from_mirror_frame(e_local, f)
            view = mirrored_view(make_pose(pos=eye), f)
            proj = offaxis_projection(e_local, f)
            expected = [(-1, -1), (1, -1), (1, 1), (-1, 1)]
            for corner, (ex, ey) in zip(f.corners_world(), expected):
                ndc = project_ndc(proj, view, corner)
                assert abs(ndc[0] - ex) < 1e-9
                assert abs(ndc[1] - ey) < 1e-9

    def test_fov_monotonic_in_width_and_depth(self):
        near = 0.05
        widths = np.linspace(0.3, 3.0, 20)
        fovs = []
        for w in widths:
            f = MirrorFrame.identity(w, w * 9 / 16)
            fovs.append(hfov_from_projection(offaxis_projection([w / 2, 0.1, 0.5], f), near))
        assert all(a < b for a, b in zip(fovs, fovs[1:]))
        f = MirrorFrame.identity(1.0, 0.6)
        depths = np.linspace(0.2, 3.0, 20)
        fovs = [
            hfov_from_projection(offaxis_projection([0.5, 0.3, d], f), near) for d in depths
        ]
        assert all(a > b for a, b in zip(fovs, fovs[1:]))

    def test_on_glass_viewer_rejected(self):
        f = MirrorFrame.identity(1, 1)
        with pytest.raises(BehindMirrorError):
            offaxis_projection([0.5, 0.5, 0.0], f)


class TestBlitRectangle:
    def test_centered_viewer_full_rect_at_overscan_one(self):
        f = MirrorFrame.identity(1.0, 0.6)
        rect = blit_rectangle([0.5, 0.3, 1.0], f, overscan=1.0)
        assert rect == Rect(0.0, 0.0, 1.0, 1.0)

    def test_rightward_viewer_shifts_rect_left(self):
        f = MirrorFrame.identity(1.0, 0.6)
        centered = blit_rectangle([0.5, 0.3, 1.0], f, overscan=1.5)
        shifted = blit_rectangle([0.7, 0.3, 1.0], f, overscan=1.5)
        assert shifted.u_min < centered.u_min
        assert shifted.u_max < centered.u_max
        assert shifted.v_min == centered.v_min

    def test_insufficient_overscan_raises_with_requirement(self):
        f = MirrorFrame.identity(1.0, 0.6)
        with pytest.raises(InsufficientOverscanError) as exc:
            blit_rectangle([0.9, 0.3, 1.0], f, overscan=1.0)
        assert exc.value.required == pytest.approx(1.8)
        # widening to the reported factor succeeds
        rect = blit_rectangle([0.9, 0.3, 1.0], f, overscan=exc.value.required)
        assert rect.is_sub_rect()

    def test_required_overscan_centered_is_one(self):
        f = MirrorFrame.identity(1.0, 0.6)
        assert required_overscan([0.5, 0.3, 2.0], f) == 1.0

    def test_two_pass_matches_single_pass_within_one_texel(self, rng):
        res = np.array([1920.0, 1080.0])
        for _ in range(200):
            f = random_frame(rng)
            e_local = np.array(
                [
                    rng.uniform(0.1 * f.width, 0.9 * f.width),
                    rng.uniform(0.1 * f.height, 0.9 * f.height),
                    rng.uniform(0.2, 3.0),
                ]
            )
            eye = from_mirror_frame(e_local, f)
            view = mirrored_view(make_pose(pos=eye), f)
            overscan = max(1.3, required_overscan(e_local, f) + 0.05)
            rect = blit_rectangle(e_local, f, overscan)
            proj_one = offaxis_projection(e_local, f)
            proj_tex = texture_projection(e_local, f, overscan)
            for _ in range(5):
                q_local = np.array(
                    [
                        rng.uniform(0, f.width),
                        rng.uniform(0, f.height),
                        rng.uniform(0.1, 5.0),
                    ]
                )
                q = from_mirror_frame(q_local, f)
                one = (project_ndc(proj_one, view, q)[:2] + 1) / 2 * res
                tex_uv = (project_ndc(proj_tex, view, q)[:2] + 1) / 2
                two = (
                    (tex_uv - [rect.u_min, rect.v_min])
                    / [rect.width, rect.height]
                    * res
                )
                assert np.max(np.abs(one - two)) < 1.0


class TestObliqueNearClip:
    def test_axial_plane_is_constant_camera_z(self):
        f = MirrorFrame.identity(1.0, 1.0)
        view = mirrored_view(make_pose(pos=(0.5, 0.5, 1.0)), f)
        plane = oblique_near_clip(view, f)
        assert np.allclose(np.abs(plane[:3]), [0, 0, 1], atol=1e-12)

    def test_glass_points_evaluate_to_zero(self, rng):
        f = random_frame(rng)
        view = mirrored_view(make_pose(pos=from_mirror_frame([0.2, 0.1, 1.1], f)), f)
        plane = oblique_near_clip(view, f)
        for corner in f.corners_world():
            cam = view @ np.append(corner, 1.0)
            assert abs(plane @ cam) < 1e-12

    def test_sign_convention_against_reflected_geometry(self, rng):
        f = random_frame(rng)
        view = mirrored_view(make_pose(pos=from_mirror_frame([0.2, 0.1, 1.1], f)), f)
        plane = oblique_near_clip(view, f)
        # 1 cm behind the glass as seen from the room: clipped side, negative
        behind = from_mirror_frame([0.3 * f.width, 0.4 * f.height, -0.01], f)
        assert plane @ (view @ np.append(behind, 1.0)) < 0
        # room-side scene geometry (whose reflection the screen shows) is kept
        room = from_mirror_frame([0.3 * f.width, 0.4 * f.height, 0.5], f)
        assert plane @ (view @ np.append(room, 1.0)) > 0
        # between the mirrored camera and the glass: clipped
        between = from_mirror_frame([0.2, 0.1, -0.5], f)
        assert plane @ (view @ np.append(between, 1.0)) < 0


class TestRenderParams:
    def test_bundle_validates(self, rng):
        f = random_frame(rng)
        viewer = make_pose(pos=from_mirror_frame([f.width / 2, f.height / 2, 1.0], f))
        params = render_params(viewer, f).validate()
        assert params.near < params.far
        assert params.texture_blit.is_sub_rect()

    def test_rejects_bad_clip_range(self):
        f = MirrorFrame.identity(1, 1)
        viewer = make_pose(pos=(0.5, 0.5, 1.0))
        with pytest.raises(ValueError):
            render_params(viewer, f, near=2.0, far=1.0)
