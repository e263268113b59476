"""Mirror-local coordinate frames and the planar reflection-point solver.

All positions are meters. The mirror frame has its origin at the bottom-left
corner of the glass, x along the width, y along the height, and z pointing
out of the glass into the room, so the glass itself is the local z = 0 plane
and everything physical happens at z > 0.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import quat
from .errors import BehindMirrorError, CalibrationError, DegenerateInputError

# Relative threshold below which the quadratic in the reflection solve is
# treated as linear (equal depths); prevents catastrophic cancellation.
EQUAL_DEPTH_REL_TOL = 1e-9

ORTHONORMAL_TOL = 1e-9


class Entity(str, Enum):
    VIEWER = "viewer"
    PLAYER_HEAD = "player_head"
    PLAYER_FEET = "player_feet"
    CONTROLLER_LEFT = "controller_left"
    CONTROLLER_RIGHT = "controller_right"
    MIRROR = "mirror"


def _as_vec3(v) -> np.ndarray:
    a = np.array(v, dtype=float).reshape(3)
    a.flags.writeable = False
    return a


def _as_quat(q) -> np.ndarray:
    a = np.array(q, dtype=float).reshape(4)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Pose:
    """Timestamped rigid transform of one tracked entity, world frame."""

    entity: Entity
    position: np.ndarray
    orientation: np.ndarray = field(default_factory=lambda: quat.IDENTITY.copy())
    timestamp_us: int = 0

    def __post_init__(self):
        object.__setattr__(self, "position", _as_vec3(self.position))
        object.__setattr__(self, "orientation", _as_quat(self.orientation))

    def validate(self):
        if not np.all(np.isfinite(self.position)):
            raise CalibrationError(f"{self.entity.value}: non-finite position")
        if not quat.is_unit(self.orientation):
            raise CalibrationError(
                f"{self.entity.value}: orientation norm "
                f"{np.linalg.norm(self.orientation):.9f} not unit within {quat.UNIT_NORM_TOL}"
            )
        return self


@dataclass(frozen=True)
class MountOffset:
    """Rigid offset from the physical mirror tracker to the glass frame.

    ``translation`` is expressed in the tracker's local frame and points from
    the tracker to the bottom-left corner of the glass; ``rotation`` maps the
    glass basis into the tracker basis.
    """

    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotation: np.ndarray = field(default_factory=lambda: quat.IDENTITY.copy())

    def __post_init__(self):
        object.__setattr__(self, "translation", _as_vec3(self.translation))
        object.__setattr__(self, "rotation", _as_quat(self.rotation))

    @classmethod
    def top_edge_centered(cls, width: float, height: float) -> "MountOffset":
        """Default mount: tracker centered on the top edge, facing the room."""
        return cls(translation=np.array([-0.5 * width, -height, 0.0]))

    def validate(self):
        if not quat.is_unit(self.rotation):
            raise CalibrationError(
                f"mount offset rotation norm {np.linalg.norm(self.rotation):.9f} not unit"
            )
        return self


@dataclass(frozen=True)
class MirrorFrame:
    """The glass's coordinate system plus its physical dimensions.

    ``basis`` columns are the world-frame directions of the local x (width),
    y (height), z (outward normal) axes.
    """

    origin: np.ndarray
    basis: np.ndarray
    width: float
    height: float

    def __post_init__(self):
        object.__setattr__(self, "origin", _as_vec3(self.origin))
        b = np.array(self.basis, dtype=float).reshape(3, 3)
        b.flags.writeable = False
        object.__setattr__(self, "basis", b)

    @classmethod
    def identity(cls, width: float, height: float) -> "MirrorFrame":
        return cls(origin=np.zeros(3), basis=np.eye(3), width=width, height=height)

    @property
    def normal(self) -> np.ndarray:
        return self.basis[:, 2]

    def validate(self):
        if self.width <= 0 or self.height <= 0:
            raise CalibrationError("mirror dimensions must be positive")
        gram = self.basis.T @ self.basis
        if not np.allclose(gram, np.eye(3), atol=ORTHONORMAL_TOL):
            raise CalibrationError("mirror basis is not orthonormal within 1e-9")
        if np.linalg.det(self.basis) < 0:
            raise CalibrationError("mirror basis is left-handed")
        return self

    def corners_world(self) -> np.ndarray:
        """Glass corners, world frame, CCW from bottom-left: BL, BR, TR, TL."""
        w, h = self.width, self.height
        local = np.array([[0, 0, 0], [w, 0, 0], [w, h, 0], [0, h, 0]], dtype=float)
        return np.array([from_mirror_frame(p, self) for p in local])


def mirror_frame_from_pose(
    tracker: Pose, offset: MountOffset, width: float, height: float
) -> MirrorFrame:
    """Build the glass frame from the live tracker pose on the mirror."""
    if tracker.entity is not Entity.MIRROR:
        raise CalibrationError(f"expected mirror tracker pose, got {tracker.entity.value}")
    if width <= 0 or height <= 0:
        raise CalibrationError("mirror dimensions must be positive")
    tracker.validate()
    offset.validate()
    r_tracker = quat.to_matrix(quat.normalize(tracker.orientation))
    basis = r_tracker @ quat.to_matrix(quat.normalize(offset.rotation))
    origin = tracker.position + r_tracker @ offset.translation
    return MirrorFrame(origin=origin, basis=basis, width=width, height=height)


def to_mirror_frame(p_world, frame: MirrorFrame) -> np.ndarray:
    p = np.asarray(p_world, dtype=float)
    return frame.basis.T @ (p - frame.origin)


def from_mirror_frame(p_local, frame: MirrorFrame) -> np.ndarray:
    p = np.asarray(p_local, dtype=float)
    return frame.origin + frame.basis @ p


class ReflectionPlane(str, Enum):
    XZ = "xz"
    YZ = "yz"


@dataclass(frozen=True)
class ReflectionPoint2D:
    """Solution of the one-axis reflection problem on the glass line."""

    s: float
    plane: ReflectionPlane


def equal_angle_residual(s: float, p, v) -> float:
    """|angle(incident, normal) - angle(reflected, normal)| at glass point s."""
    px, pz = p
    vx, vz = v
    dp = math.hypot(px - s, pz)
    dv = math.hypot(vx - s, vz)
    if dp == 0.0 or dv == 0.0:
        return 0.0
    ap = math.acos(max(-1.0, min(1.0, pz / dp)))
    av = math.acos(max(-1.0, min(1.0, vz / dv)))
    return abs(ap - av)


def solve_reflection_1d(p, v, plane: ReflectionPlane = ReflectionPlane.XZ) -> ReflectionPoint2D:
    """Glass coordinate where the viewer sees the player's reflection, one axis.

    ``p`` and ``v`` are (coord, depth) pairs in mirror-local coordinates with
    depth measured outward from the glass. The equal-angle condition reduces
    to a quadratic in the glass coordinate; of its two roots the physical one
    lies between the player and viewer coordinates.
    """
    px, pz = float(p[0]), float(p[1])
    vx, vz = float(v[0]), float(v[1])
    if px == vx and pz == vz and pz == 0.0:
        raise DegenerateInputError("player and viewer coincide on the glass")
    if pz <= 0.0 or vz <= 0.0:
        raise BehindMirrorError(
            f"reflection undefined for depths p_z={pz}, v_z={vz} (both must be > 0)"
        )

    lo, hi = (px, vx) if px <= vx else (vx, px)

    if pz == vz:
        s = 0.5 * (px + vx)
    else:
        a = pz * pz - vz * vz
        b = px * vz * vz - vx * pz * pz  # half the linear coefficient
        c = vx * vx * pz * pz - px * px * vz * vz
        if abs(a) < EQUAL_DEPTH_REL_TOL * max(pz * pz, vz * vz):
            # near-equal depths: the quadratic degenerates; solve the linear form
            s = 0.5 * (px + vx) if b == 0.0 else -c / (2.0 * b)
        else:
            # the discriminant simplifies exactly: b^2 - a*c = (pz*vz*(px - vx))^2
            sq = abs(pz * vz * (px - vx))
            q = -(b + sq) if b >= 0.0 else -(b - sq)
            r1 = q / a
            r2 = c / q if q != 0.0 else r1
            s = _select_root(r1, r2, lo, hi, (px, pz), (vx, vz))

    s = min(max(s, lo), hi)
    return ReflectionPoint2D(s=s, plane=plane)


def _select_root(r1: float, r2: float, lo: float, hi: float, p, v) -> float:
    tol = 1e-9 * (1.0 + hi - lo)
    in1 = lo - tol <= r1 <= hi + tol
    in2 = lo - tol <= r2 <= hi + tol
    if in1 and in2 and r1 != r2:
        # both inside only at the edge of numerical noise; the equal-angle
        # residual is the defining physical property, so it breaks the tie
        if equal_angle_residual(r2, p, v) < equal_angle_residual(r1, p, v):
            return r2
        return r1
    if in1:
        return r1
    if in2:
        return r2
    # should not happen for valid inputs; fall back to the root nearest the bound
    d1 = max(lo - r1, r1 - hi)
    d2 = max(lo - r2, r2 - hi)
    return r1 if d1 <= d2 else r2


def reflect_point_on_mirror(player_local, viewer_local) -> np.ndarray:
    """Both glass coordinates (s_x, s_y) of the player's reflection.

    Applies the one-axis solve to the xz- and yz-plane reductions; inputs are
    mirror-local with z > 0.
    """
    p = np.asarray(player_local, dtype=float)
    v = np.asarray(viewer_local, dtype=float)
    sx = solve_reflection_1d((p[0], p[2]), (v[0], v[2]), ReflectionPlane.XZ)
    sy = solve_reflection_1d((p[1], p[2]), (v[1], v[2]), ReflectionPlane.YZ)
    return np.array([sx.s, sy.s])


def reflection_matrix(frame: MirrorFrame) -> np.ndarray:
    """4x4 world-frame reflection across the glass plane.

    An involution with determinant -1 that fixes every point on the glass.
    """
    n = frame.normal
    d = float(n @ frame.origin)
    m = np.eye(4)
    m[:3, :3] = np.eye(3) - 2.0 * np.outer(n, n)
    m[:3, 3] = 2.0 * d * n
    return m
