"""Operator-facing self-checks: the closed-form geometry against built-in
brute-force counterparts, runnable on any deployment via ``mirrorcast
selftest``.

The brute-force reflection search here is intentionally independent of the
solver's algebra: it minimizes the viewer-to-player travel path over the
glass line (a golden-section pass finished by derivative-sign bisection).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import frustum, quat
from .analysis import fov_report, panel_dims
from .geometry import (
    MirrorFrame,
    Pose,
    Entity,
    equal_angle_residual,
    from_mirror_frame,
    reflection_matrix,
    solve_reflection_1d,
    to_mirror_frame,
)
from .poseio import PoseMessage, decode, encode


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<36} {self.detail}"


def _path_length(s, px, pz, vx, vz):
    return np.sqrt((vx - s) ** 2 + vz**2) + np.sqrt((px - s) ** 2 + pz**2)


def _path_slope(s, px, pz, vx, vz):
    dv = np.sqrt((vx - s) ** 2 + vz**2)
    dp = np.sqrt((px - s) ** 2 + pz**2)
    return (s - vx) / dv + (s - px) / dp


def brute_force_reflection(px, pz, vx, vz):
    a = np.minimum(px, vx).astype(float)
    b = np.maximum(px, vx).astype(float)
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    invphi2 = (3.0 - math.sqrt(5.0)) / 2.0
    for _ in range(10):
        h = b - a
        c = a + invphi2 * h
        d = a + invphi * h
        left = _path_length(c, px, pz, vx, vz) < _path_length(d, px, pz, vx, vz)
        b = np.where(left, d, b)
        a = np.where(left, a, c)
    for _ in range(64):
        mid = 0.5 * (a + b)
        neg = _path_slope(mid, px, pz, vx, vz) < 0.0
        a = np.where(neg, mid, a)
        b = np.where(neg, b, mid)
    return 0.5 * (a + b)


def check_worked_examples() -> CheckResult:
    s1 = solve_reflection_1d((0, 1), (3, 2)).s
    s2 = solve_reflection_1d((2, 1), (0, 3)).s
    ok = abs(s1 - 1.0) < 1e-12 and abs(s2 - 1.5) < 1e-12
    return CheckResult("solver-worked-examples", ok, f"s={s1:.15f}, {s2:.15f}")


def check_solver_oracle(n: int = 20_000, seed: int = 7) -> CheckResult:
    rng = np.random.default_rng(seed)
    px, vx = rng.uniform(-10, 10, n), rng.uniform(-10, 10, n)
    pz, vz = rng.uniform(0.01, 10, n), rng.uniform(0.01, 10, n)
    got = np.array([
        solve_reflection_1d((px[i], pz[i]), (vx[i], vz[i])).s for i in range(n)
    ])
    expected = brute_force_reflection(px, pz, vx, vz)
    worst = float(np.max(np.abs(got - expected)))
    contained = bool(np.all((got >= np.minimum(px, vx)) & (got <= np.maximum(px, vx))))
    residual = max(
        equal_angle_residual(got[i], (px[i], pz[i]), (vx[i], vz[i]))
        for i in range(0, n, max(1, n // 2000))
    )
    ok = worst < 1e-9 and contained and residual < 1e-9
    return CheckResult(
        "solver-oracle-equivalence", ok,
        f"max|ds|={worst:.2e}, residual<{residual:.2e}, bound={'ok' if contained else 'VIOLATED'} (n={n})",
    )


def check_mirror_equivalence(n: int = 2_000, seed: int = 11) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_inv = 0.0
    for _ in range(8):
        q = rng.normal(size=4)
        frame = MirrorFrame(
            origin=rng.uniform(-3, 3, 3), basis=quat.to_matrix(q / np.linalg.norm(q)),
            width=rng.uniform(0.3, 2), height=rng.uniform(0.3, 2),
        )
        refl = reflection_matrix(frame)
        worst_inv = max(worst_inv, float(np.max(np.abs(refl @ refl - np.eye(4)))),
                        abs(float(np.linalg.det(refl[:3, :3])) + 1.0))
        eye = from_mirror_frame([0.3 * frame.width, 0.5 * frame.height, 1.1], frame)
        viewer = Pose(Entity.VIEWER, eye)
        view_m = frustum.mirrored_view(viewer, frame)
        view_p = frustum.eye_view(eye, frame)
        proj = frustum.offaxis_projection(to_mirror_frame(eye, frame), frame)
        for _ in range(n // 8):
            q_local = np.array([rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.05, 5)])
            point = from_mirror_frame(q_local, frame)
            reflected = (refl @ np.append(point, 1.0))[:3]
            a = frustum.project_ndc(proj, view_m, point)
            b = frustum.project_ndc(proj, view_p, reflected)
            worst = max(worst, float(np.max(np.abs(a - b))))
    ok = worst < 1e-9 and worst_inv < 1e-12
    return CheckResult(
        "mirror-render-equivalence", ok,
        f"max|dNDC|={worst:.2e}, involution/det err={worst_inv:.2e} (n={n})",
    )


def check_two_pass_agreement(n: int = 200, seed: int = 13) -> CheckResult:
    rng = np.random.default_rng(seed)
    res = np.array([1920.0, 1080.0])
    worst = 0.0
    frame = MirrorFrame.identity(1.0, 9 / 16)
    for _ in range(n):
        e = np.array([
            rng.uniform(0.05, 0.95) * frame.width,
            rng.uniform(0.05, 0.95) * frame.height,
            rng.uniform(0.2, 3.0),
        ])
        overscan = max(1.3, frustum.required_overscan(e, frame) + 0.05)
        rect = frustum.blit_rectangle(e, frame, overscan)
        view = frustum.mirrored_view(Pose(Entity.VIEWER, from_mirror_frame(e, frame)), frame)
        proj_one = frustum.offaxis_projection(e, frame)
        proj_tex = frustum.texture_projection(e, frame, overscan)
        for _ in range(4):
            q = from_mirror_frame(
                [rng.uniform(0, frame.width), rng.uniform(0, frame.height),
                 rng.uniform(0.1, 4)], frame)
            one = (frustum.project_ndc(proj_one, view, q)[:2] + 1) / 2 * res
            uv = (frustum.project_ndc(proj_tex, view, q)[:2] + 1) / 2
            two = (uv - [rect.u_min, rect.v_min]) / [rect.width, rect.height] * res
            worst = max(worst, float(np.max(np.abs(one - two))))
    return CheckResult(
        "two-pass-one-pass-agreement", worst < 1.0,
        f"max|dpixel|={worst:.2e} texels at 1920x1080 (n={n})",
    )


def check_screen_size_fov() -> CheckResult:
    w24, h24 = panel_dims(24)
    w50, h50 = panel_dims(50)
    f24 = fov_report([w24 / 2, h24 / 2, 0.5], w24, h24).h_fov_deg
    f50 = fov_report([w50 / 2, h50 / 2, 0.5], w50, h50).h_fov_deg
    expected24 = math.degrees(2 * math.atan(w24 / 2 / 0.5))
    expected50 = math.degrees(2 * math.atan(w50 / 2 / 0.5))
    sweep = [
        fov_report([panel_dims(d)[0] / 2, panel_dims(d)[1] / 2, 0.5],
                   *panel_dims(d)).h_fov_deg
        for d in np.linspace(15, 80, 20)
    ]
    ok = (
        abs(f24 - expected24) < 0.1
        and abs(f50 - expected50) < 0.1
        and f50 > f24
        and all(a < b for a, b in zip(sweep, sweep[1:]))
    )
    return CheckResult(
        "screen-size-fov", ok,
        f"hFOV 24in={f24:.2f} deg, 50in={f50:.2f} deg, monotone sweep "
        f"{'ok' if ok else 'violated'}",
    )


def check_wire_round_trip(n: int = 2_000, seed: int = 17) -> CheckResult:
    rng = np.random.default_rng(seed)
    entities = list(Entity)
    for i in range(n):
        msg = PoseMessage(
            entity=entities[int(rng.integers(len(entities)))],
            position=tuple(rng.uniform(-50, 50, 3)),
            orientation=tuple(rng.uniform(-1, 1, 4)),
            timestamp_us=int(rng.integers(0, 2**48)),
            sequence=int(rng.integers(0, 2**32)),
            sender_id=int(rng.integers(0, 2**16)),
        )
        if decode(encode(msg)) != msg:
            return CheckResult("wire-round-trip", False, f"mismatch at i={i}")
        if PoseMessage.from_json_dict(msg.to_json_dict()) != msg:
            return CheckResult("wire-round-trip", False, f"json mismatch at i={i}")
    return CheckResult("wire-round-trip", True, f"binary+json bit-exact (n={n})")


ALL_CHECKS = (
    check_worked_examples,
    check_solver_oracle,
    check_mirror_equivalence,
    check_two_pass_agreement,
    check_screen_size_fov,
    check_wire_round_trip,
)


def run_selftest(fast: bool = False) -> list:
    results = []
    for check in ALL_CHECKS:
        results.append(check())
    return results
