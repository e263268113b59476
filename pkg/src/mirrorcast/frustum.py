"""View-dependent rendering mathematics for the glass-as-window display.

Two equivalent pipelines are supported. The literal one renders the mirrored
scene from the viewer into an overscanned texture and blits a viewer-dependent
sub-rectangle to the screen; the direct one uses a single off-axis projection
whose near plane is pinned to the glass quad. The test suite proves the two
agree to sub-texel precision.

Matrix conventions: column vectors, OpenGL clip space (camera looks along -z,
NDC in [-1, 1]^3). Serialized matrices are column-major.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BehindMirrorError, InsufficientOverscanError
from .geometry import MirrorFrame, Pose, reflection_matrix, to_mirror_frame

DEFAULT_NEAR = 0.05
DEFAULT_FAR = 100.0
DEFAULT_OVERSCAN = 1.3


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in [0,1]^2 texture coordinates."""

    u_min: float
    v_min: float
    u_max: float
    v_max: float

    @property
    def width(self) -> float:
        return self.u_max - self.u_min

    @property
    def height(self) -> float:
        return self.v_max - self.v_min

    def is_sub_rect(self, tol: float = 1e-9) -> bool:
        return (
            self.width > 0
            and self.height > 0
            and self.u_min >= -tol
            and self.v_min >= -tol
            and self.u_max <= 1 + tol
            and self.v_max <= 1 + tol
        )


@dataclass(frozen=True)
class RenderParams:
    """Everything a renderer needs for one spectator frame."""

    view_matrix: np.ndarray
    projection_matrix: np.ndarray
    oblique_clip_plane: np.ndarray
    texture_blit: Rect
    near: float
    far: float

    def validate(self):
        if not (0 < self.near < self.far):
            raise ValueError(f"invalid clip range near={self.near} far={self.far}")
        det = np.linalg.det(self.view_matrix[:3, :3])
        if abs(det + 1.0) > 1e-9:
            raise ValueError(f"view matrix 3x3 determinant {det}, expected -1")
        if not self.texture_blit.is_sub_rect():
            raise ValueError(f"blit {self.texture_blit} is not a sub-rectangle of [0,1]^2")
        return self


def eye_view(eye_world, frame: MirrorFrame) -> np.ndarray:
    """World-to-camera matrix for an eye at ``eye_world`` facing the glass.

    Camera axes are the mirror axes: +x along the width, +y along the height,
    -z looking into the glass.
    """
    r = frame.basis
    eye = np.asarray(eye_world, dtype=float)
    view = np.eye(4)
    view[:3, :3] = r.T
    view[:3, 3] = -r.T @ eye
    return view


def mirrored_view(viewer: Pose, frame: MirrorFrame) -> np.ndarray:
    """The paper-style mirrored camera: viewer camera times glass reflection.

    Projecting a world point with this matrix equals projecting its mirror
    image with the plain viewer camera.
    """
    local = to_mirror_frame(viewer.position, frame)
    if local[2] <= 0.0:
        raise BehindMirrorError(f"viewer depth {local[2]:.6f} m is not in front of the glass")
    return eye_view(viewer.position, frame) @ reflection_matrix(frame)


def frustum_matrix(left, right, bottom, top, near, far) -> np.ndarray:
    m = np.zeros((4, 4))
    m[0, 0] = 2 * near / (right - left)
    m[0, 2] = (right + left) / (right - left)
    m[1, 1] = 2 * near / (top - bottom)
    m[1, 2] = (top + bottom) / (top - bottom)
    m[2, 2] = -(far + near) / (far - near)
    m[2, 3] = -2 * far * near / (far - near)
    m[3, 2] = -1.0
    return m


def offaxis_projection(
    viewer_local, frame: MirrorFrame, near: float = DEFAULT_NEAR, far: float = DEFAULT_FAR
) -> np.ndarray:
    """Perspective projection whose near-plane extents pin the glass corners.

    ``viewer_local`` is the eye in mirror-local coordinates. A point on a
    glass corner projects exactly to the matching NDC corner.
    """
    e = np.asarray(viewer_local, dtype=float)
    if not near < far:
        raise ValueError(f"near {near} must be below far {far}")
    if e[2] <= near * 1e-3:
        raise BehindMirrorError(f"viewer depth {e[2]:.6f} m is on or behind the glass")
    scale = near / e[2]
    left = (0.0 - e[0]) * scale
    right = (frame.width - e[0]) * scale
    bottom = (0.0 - e[1]) * scale
    top = (frame.height - e[1]) * scale
    return frustum_matrix(left, right, bottom, top, near, far)


def texture_projection(
    viewer_local,
    frame: MirrorFrame,
    overscan: float = DEFAULT_OVERSCAN,
    near: float = DEFAULT_NEAR,
    far: float = DEFAULT_FAR,
) -> np.ndarray:
    """Symmetric projection for the intermediate render-to-texture pass.

    Covers an overscan-scaled copy of the glass quad centered on the camera
    axis, so the viewer-dependent blit rectangle can be cut from it.
    """
    e = np.asarray(viewer_local, dtype=float)
    if e[2] <= near * 1e-3:
        raise BehindMirrorError(f"viewer depth {e[2]:.6f} m is on or behind the glass")
    half_u = overscan * 0.5 * frame.width * near / e[2]
    half_v = overscan * 0.5 * frame.height * near / e[2]
    return frustum_matrix(-half_u, half_u, -half_v, half_v, near, far)


def required_overscan(viewer_local, frame: MirrorFrame) -> float:
    """Smallest overscan whose texture contains the viewer's blit rectangle."""
    e = np.asarray(viewer_local, dtype=float)
    return max(
        1.0,
        2.0 * e[0] / frame.width,
        2.0 * (frame.width - e[0]) / frame.width,
        2.0 * e[1] / frame.height,
        2.0 * (frame.height - e[1]) / frame.height,
    )


def blit_rectangle(viewer_local, frame: MirrorFrame, overscan: float = DEFAULT_OVERSCAN) -> Rect:
    """Sub-rectangle of the overscanned texture that lands on the glass.

    Blitting this rectangle to the full screen reproduces the off-axis image;
    moving the viewer right shifts the rectangle left (mirror parity).
    """
    if overscan < 1.0:
        raise ValueError(f"overscan {overscan} must be >= 1")
    e = np.asarray(viewer_local, dtype=float)
    if e[2] <= 0.0:
        raise BehindMirrorError(f"viewer depth {e[2]:.6f} m is not in front of the glass")
    u_min = (overscan * frame.width / 2 - e[0]) / (overscan * frame.width)
    v_min = (overscan * frame.height / 2 - e[1]) / (overscan * frame.height)
    rect = Rect(u_min, v_min, u_min + 1.0 / overscan, v_min + 1.0 / overscan)
    if not rect.is_sub_rect():
        need = required_overscan(viewer_local, frame)
        raise InsufficientOverscanError(
            f"blit rectangle {rect} exceeds the texture; overscan >= {need:.4f} required",
            required=need,
        )
    return rect


def oblique_near_clip(view: np.ndarray, frame: MirrorFrame) -> np.ndarray:
    """Glass plane in camera space, positive on the kept (room) side.

    Evaluated against camera-space positions of rendered vertices: world
    points on the room side of the glass come out positive, the glass itself
    is zero, and anything between the mirrored camera and the glass (the
    "inside the wall" region a mirror must not show) is negative.
    """
    n = frame.normal
    plane_world = np.append(n, -float(n @ frame.origin))
    plane_cam = np.linalg.inv(view).T @ plane_world
    norm = np.linalg.norm(plane_cam[:3])
    return plane_cam / norm


def render_params(
    viewer: Pose,
    frame: MirrorFrame,
    near: float = DEFAULT_NEAR,
    far: float = DEFAULT_FAR,
    overscan: float = DEFAULT_OVERSCAN,
) -> RenderParams:
    """Bundle the full per-frame recipe for one viewer pose."""
    local = to_mirror_frame(viewer.position, frame)
    view = mirrored_view(viewer, frame)
    return RenderParams(
        view_matrix=view,
        projection_matrix=offaxis_projection(local, frame, near, far),
        oblique_clip_plane=oblique_near_clip(view, frame),
        texture_blit=blit_rectangle(local, frame, overscan),
        near=near,
        far=far,
    )


def project_ndc(projection: np.ndarray, view: np.ndarray, point_world) -> np.ndarray:
    """Project a world point to normalized device coordinates."""
    q = np.append(np.asarray(point_world, dtype=float), 1.0)
    clip = projection @ (view @ q)
    return clip[:3] / clip[3]
