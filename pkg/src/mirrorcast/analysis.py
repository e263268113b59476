"""Computable spectator-experience metrics: field of view vs screen size,
silhouette screen coverage, and jump-discontinuity (teleport) detection."""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import BehindMirrorError
from .silhouette import SilhouettePolygon, clip_polygon

INCH = 0.0254

DEFAULT_TELEPORT_THRESHOLD = 10.0  # m/s, well above human locomotion


def panel_dims(diagonal_inches: float, aspect: tuple = (16, 9)) -> tuple:
    """Width and height in meters of a panel given its diagonal."""
    if diagonal_inches <= 0:
        raise ValueError("diagonal must be positive")
    ax, ay = aspect
    d = diagonal_inches * INCH
    hyp = math.hypot(ax, ay)
    return d * ax / hyp, d * ay / hyp


def panel_diagonal(width: float, height: float) -> float:
    """Diagonal in inches from panel dimensions in meters."""
    return math.hypot(width, height) / INCH


@dataclass(frozen=True)
class FovReport:
    h_fov_deg: float
    v_fov_deg: float
    solid_angle_sr: float
    diagonal_in: float
    width: float
    height: float
    viewer_depth: float

    def to_dict(self) -> dict:
        return {
            "h_fov_deg": self.h_fov_deg,
            "v_fov_deg": self.v_fov_deg,
            "solid_angle_sr": self.solid_angle_sr,
            "diagonal_in": self.diagonal_in,
            "width_m": self.width,
            "height_m": self.height,
            "viewer_depth_m": self.viewer_depth,
        }


def _rect_solid_angle(x0, x1, y0, y1, z) -> float:
    """Solid angle of the rectangle [x0,x1]x[y0,y1] at depth z from the eye.

    Inclusion-exclusion over the four corner quadrants of the standard
    corner-rectangle formula.
    """
    def omega(a, b):
        return math.atan2(a * b, z * math.sqrt(a * a + b * b + z * z))

    return omega(x1, y1) - omega(x0, y1) - omega(x1, y0) + omega(x0, y0)


def fov_report(viewer_local, width: float, height: float) -> FovReport:
    """Exact analytic field of view of the glass from a mirror-local eye.

    Off-center eyes are handled by the angle actually subtended by the glass
    edges, not an axis-symmetric approximation.
    """
    e = np.asarray(viewer_local, dtype=float)
    if e[2] <= 0:
        raise BehindMirrorError(f"viewer depth {e[2]:.6f} m is not in front of the glass")
    h_fov = math.atan2(e[0], e[2]) + math.atan2(width - e[0], e[2])
    v_fov = math.atan2(e[1], e[2]) + math.atan2(height - e[1], e[2])
    solid = _rect_solid_angle(0.0 - e[0], width - e[0], 0.0 - e[1], height - e[1], e[2])
    return FovReport(
        h_fov_deg=math.degrees(h_fov),
        v_fov_deg=math.degrees(v_fov),
        solid_angle_sr=solid,
        diagonal_in=panel_diagonal(width, height),
        width=width,
        height=height,
        viewer_depth=float(e[2]),
    )


@dataclass(frozen=True)
class CoverageReport:
    coverage: float  # polygon area inside the unit screen (screen area = 1)
    overflow: float  # polygon area hanging off screen

    def to_dict(self) -> dict:
        return {"coverage": self.coverage, "overflow": self.overflow}


def _signed_area(pts: np.ndarray) -> float:
    if len(pts) < 3:
        return 0.0
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def silhouette_coverage(poly: SilhouettePolygon) -> CoverageReport:
    """Exact on-screen area of the overlay polygon by polygon clipping."""
    outline = np.asarray(poly.outline, dtype=float)
    total = abs(_signed_area(outline))
    onscreen = abs(_signed_area(clip_polygon(outline, 0.0, 1.0)))
    # clamp tiny negatives from floating point
    return CoverageReport(coverage=max(0.0, onscreen), overflow=max(0.0, total - onscreen))


class EventKind(str, Enum):
    TELEPORT = "teleport"
    STALE = "stale"
    SILHOUETTE_OFFSCREEN = "silhouette_offscreen"


@dataclass(frozen=True)
class EventFlag:
    kind: EventKind
    tick: int | None = None
    magnitude: float = 0.0

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "tick": self.tick, "magnitude": self.magnitude}


def detect_teleport(
    prev_position,
    next_position,
    dt: float,
    threshold: float = DEFAULT_TELEPORT_THRESHOLD,
    tick: int | None = None,
):
    """Flag a jump whose implied speed exceeds the threshold; None otherwise."""
    if dt <= 0:
        raise ValueError(f"dt {dt} must be positive")
    displacement = float(
        np.linalg.norm(np.asarray(next_position, float) - np.asarray(prev_position, float))
    )
    if displacement / dt > threshold:
        return EventFlag(kind=EventKind.TELEPORT, tick=tick, magnitude=displacement)
    return None
