"""Screen-space silhouette overlay: the dark region that makes the glass
reflect the player into the rendered scene.

The overlay is anchored by running the reflection solver on the body's
extremal points (head top, feet, shoulders), which automatically produces the
depth-correct apparent size. Coordinates of finished polygons are normalized
to [0,1]^2 over the glass, origin bottom-left.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import PoseValidityError
from .geometry import MirrorFrame, Pose, solve_reflection_1d, to_mirror_frame

# vertical drop from the head anchor to the shoulder line, meters
SHOULDER_DROP = 0.25

# overlay vertices may overhang the screen by half a screen in each direction
OVERHANG_BOUNDS = (-0.5, 1.5)

DEFAULT_SEGMENTS = 64


class ShapeVariant(str, Enum):
    DEFAULT_OVAL = "default_oval"
    TRANSPARENT_OVAL = "transparent_oval"
    NARROW_OVAL = "narrow_oval"
    BODY_WITH_ARMS = "body_with_arms"


_VARIANT_DEFAULTS = {
    ShapeVariant.DEFAULT_OVAL: (1.0, 1.0),
    ShapeVariant.TRANSPARENT_OVAL: (0.5, 1.0),
    ShapeVariant.NARROW_OVAL: (1.0, 0.5),
    ShapeVariant.BODY_WITH_ARMS: (1.0, 1.0),
}


@dataclass(frozen=True)
class SilhouetteShape:
    variant: ShapeVariant = ShapeVariant.DEFAULT_OVAL
    opacity: float = 1.0
    width_scale: float = 1.0

    @classmethod
    def preset(cls, variant: ShapeVariant) -> "SilhouetteShape":
        opacity, width_scale = _VARIANT_DEFAULTS[variant]
        return cls(variant=variant, opacity=opacity, width_scale=width_scale)

    def validate(self):
        if not 0.0 <= self.opacity <= 1.0:
            raise ValueError(f"opacity {self.opacity} outside [0, 1]")
        if not 0.0 < self.width_scale <= 4.0:
            raise ValueError(f"width_scale {self.width_scale} outside (0, 4]")
        return self


@dataclass(frozen=True)
class BodyModel:
    """Coarse body dimensions used to pick the extremal reflection anchors."""

    shoulder_half_width: float = 0.25
    head_radius: float = 0.12
    arm_radius: float = 0.06

    def validate(self):
        for name in ("shoulder_half_width", "head_radius", "arm_radius"):
            if getattr(self, name) <= 0:
                raise ValueError(f"body model field {name} must be positive")
        return self


@dataclass(frozen=True)
class Capsule:
    """Thick segment in normalized screen coordinates.

    ``radius`` is normalized by the glass width, like the u axis.
    """

    a: tuple
    b: tuple
    radius: float


@dataclass(frozen=True)
class AnchorBox:
    """Axis-aligned silhouette bounds on the glass, meters, mirror-local."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    @property
    def center(self):
        return 0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max)

    @property
    def size(self):
        return self.x_max - self.x_min, self.y_max - self.y_min


@dataclass(frozen=True)
class SilhouettePolygon:
    outline: np.ndarray  # (N, 2) normalized screen coordinates
    opacity: float
    arm_capsules: tuple = ()
    variant: ShapeVariant = ShapeVariant.DEFAULT_OVAL

    def __post_init__(self):
        pts = np.asarray(self.outline, dtype=float).reshape(-1, 2)
        pts.flags.writeable = False
        object.__setattr__(self, "outline", pts)
        object.__setattr__(self, "arm_capsules", tuple(self.arm_capsules))

    def validate(self):
        if not 0.0 <= self.opacity <= 1.0:
            raise ValueError(f"opacity {self.opacity} outside [0, 1]")
        if len(self.outline) == 0:
            return self  # fully clipped away: a legal empty overlay
        lo, hi = OVERHANG_BOUNDS
        if np.any(self.outline < lo - 1e-9) or np.any(self.outline > hi + 1e-9):
            raise ValueError("outline vertex outside the extended screen bounds")
        if len(self.outline) < 8:
            raise ValueError(f"outline has {len(self.outline)} vertices, need >= 8")
        if not _is_simple(self.outline):
            raise ValueError("outline is self-intersecting")
        return self


def _is_simple(pts: np.ndarray) -> bool:
    """Non-adjacent edge pairs must not cross; degenerate flats are accepted."""
    n = len(pts)
    if n < 4:
        return True
    span = pts.max(axis=0) - pts.min(axis=0)
    if min(span) < 1e-12:
        return True
    starts = pts
    ends = np.roll(pts, -1, axis=0)
    i_idx, j_idx = np.triu_indices(n, k=2)
    keep = ~((i_idx == 0) & (j_idx == n - 1))  # wrap-around pair is adjacent
    i_idx, j_idx = i_idx[keep], j_idx[keep]

    def orient(p, q, r):
        return (q[:, 0] - p[:, 0]) * (r[:, 1] - p[:, 1]) - (
            q[:, 1] - p[:, 1]
        ) * (r[:, 0] - p[:, 0])

    a1, a2 = starts[i_idx], ends[i_idx]
    b1, b2 = starts[j_idx], ends[j_idx]
    d1 = orient(a1, a2, b1)
    d2 = orient(a1, a2, b2)
    d3 = orient(b1, b2, a1)
    d4 = orient(b1, b2, a2)
    crossing = (
        ((d1 > 0) != (d2 > 0)) & ((d3 > 0) != (d4 > 0)) & (d1 != d2) & (d3 != d4)
    )
    return not bool(crossing.any())


def clip_polygon(pts: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a polygon against the square [lo, hi]^2."""
    def clip_edge(poly, axis, bound, keep_below):
        vals = poly[:, axis]
        nxt = np.roll(poly, -1, axis=0)
        nxt_vals = np.roll(vals, -1)
        inside = vals <= bound if keep_below else vals >= bound
        nxt_inside = nxt_vals <= bound if keep_below else nxt_vals >= bound
        crossing = inside != nxt_inside
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(crossing, (bound - vals) / (nxt_vals - vals), 0.0)
        inter = poly + t[:, None] * (nxt - poly)
        # slot layout keeps emission order: vertex i, then its crossing point
        n = len(poly)
        candidates = np.empty((2 * n, 2))
        candidates[0::2] = poly
        candidates[1::2] = inter
        valid = np.empty(2 * n, dtype=bool)
        valid[0::2] = inside
        valid[1::2] = crossing
        return candidates[valid]

    poly = np.asarray(pts, dtype=float).reshape(-1, 2)
    for axis, bound, keep_below in (
        (0, lo, False),
        (0, hi, True),
        (1, lo, False),
        (1, hi, True),
    ):
        if len(poly) == 0:
            return np.zeros((0, 2))
        poly = clip_edge(poly, axis, bound, keep_below)
    return poly if len(poly) else np.zeros((0, 2))


def _subdivide_to(pts: np.ndarray, n_min: int) -> np.ndarray:
    pts = list(pts)
    while 0 < len(pts) < n_min:
        longest = max(
            range(len(pts)),
            key=lambda i: float(np.linalg.norm(pts[(i + 1) % len(pts)] - pts[i])),
        )
        mid = 0.5 * (pts[longest] + pts[(longest + 1) % len(pts)])
        pts.insert(longest + 1, mid)
    return np.array(pts)


def silhouette_anchor_box(
    player_head: Pose,
    player_feet: Pose,
    viewer: Pose,
    frame: MirrorFrame,
    body: BodyModel,
) -> AnchorBox:
    """Reflect the body's extremal points onto the glass.

    Top edge comes from the head plus the head radius, bottom from the feet,
    sides from the shoulder extremes; each is one run of the reflection
    solver, so the box inherits the solver's apparent-size scaling.
    """
    head = to_mirror_frame(player_head.position, frame)
    feet = to_mirror_frame(player_feet.position, frame)
    eye = to_mirror_frame(viewer.position, frame)
    if head[1] < feet[1]:
        raise PoseValidityError(
            f"player head y={head[1]:.3f} below feet y={feet[1]:.3f} in mirror frame"
        )
    vx, vy, vz = eye
    x_min = solve_reflection_1d((head[0] - body.shoulder_half_width, head[2]), (vx, vz)).s
    x_max = solve_reflection_1d((head[0] + body.shoulder_half_width, head[2]), (vx, vz)).s
    y_max = solve_reflection_1d((head[1] + body.head_radius, head[2]), (vy, vz)).s
    y_min = solve_reflection_1d((feet[1], feet[2]), (vy, vz)).s
    if y_min > y_max:
        y_min, y_max = y_max, y_min
    return AnchorBox(x_min=x_min, x_max=x_max, y_min=y_min, y_max=y_max)


def build_polygon(
    box: AnchorBox,
    shape: SilhouetteShape,
    frame: MirrorFrame,
    segments: int = DEFAULT_SEGMENTS,
) -> SilhouettePolygon:
    """Inscribe the shape's ellipse in the anchor box, normalized to the glass."""
    if segments < 8:
        raise ValueError("oval needs at least 8 segments")
    w, h = box.size
    if max(abs(w), abs(h)) > 10.0 or max(map(abs, box.center)) > 20.0:
        raise ValueError(f"anchor box {box} beyond sane extents")
    cx, cy = box.center
    semi_u = 0.5 * w * shape.width_scale / frame.width
    semi_v = 0.5 * h / frame.height
    cu, cv = cx / frame.width, cy / frame.height
    theta = np.linspace(0.0, 2.0 * math.pi, segments, endpoint=False)
    outline = np.column_stack([cu + semi_u * np.cos(theta), cv + semi_v * np.sin(theta)])
    outline = clip_polygon(outline, *OVERHANG_BOUNDS)
    if 0 < len(outline) < 8:
        outline = _subdivide_to(outline, 8)
    return SilhouettePolygon(outline=outline, opacity=shape.opacity, variant=shape.variant)


def arm_capsules(
    controller_left: Pose,
    controller_right: Pose,
    player_head: Pose,
    viewer: Pose,
    frame: MirrorFrame,
    body: BodyModel,
) -> tuple:
    """Reflected arm capsules from the shoulders to the tracked controllers."""
    head = to_mirror_frame(player_head.position, frame)
    eye = to_mirror_frame(viewer.position, frame)
    capsules = []
    for ctrl_pose, side in ((controller_left, -1.0), (controller_right, +1.0)):
        ctrl = to_mirror_frame(ctrl_pose.position, frame)
        shoulder = np.array(
            [head[0] + side * body.shoulder_half_width, head[1] - SHOULDER_DROP, head[2]]
        )
        a = _reflect_uv(shoulder, eye, frame)
        b = _reflect_uv(ctrl, eye, frame)
        # the same per-axis solve applied to the radius extremes scales the
        # capsule thickness with apparent size
        r_lo = solve_reflection_1d((ctrl[0] - body.arm_radius, ctrl[2]), (eye[0], eye[2])).s
        r_hi = solve_reflection_1d((ctrl[0] + body.arm_radius, ctrl[2]), (eye[0], eye[2])).s
        radius = 0.5 * (r_hi - r_lo) / frame.width
        capsules.append(Capsule(a=tuple(a), b=tuple(b), radius=radius))
    return tuple(capsules)


def _reflect_uv(point_local, eye_local, frame: MirrorFrame) -> np.ndarray:
    sx = solve_reflection_1d((point_local[0], point_local[2]), (eye_local[0], eye_local[2])).s
    sy = solve_reflection_1d((point_local[1], point_local[2]), (eye_local[1], eye_local[2])).s
    return np.array([sx / frame.width, sy / frame.height])


def adaptive_opacity(
    base: SilhouetteShape, background_luminance: float, ramp: float = 0.8
) -> float:
    """Darken the overlay in bright scenes; anchored at the base opacity for
    mid luminance and clamped to [0.2, 1.0]."""
    if not 0.0 <= background_luminance <= 1.0:
        raise ValueError(f"luminance {background_luminance} outside [0, 1]")
    raw = base.opacity + ramp * (background_luminance - 0.5)
    return min(1.0, max(0.2, raw))
