"""Self-contained per-tick frame bundles streamed to renderer clients."""

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from ..analysis import FovReport
from ..frustum import Rect
from ..silhouette import SilhouettePolygon


@dataclass(frozen=True)
class FrameUpdate:
    tick: int
    timestamp_us: int
    view: np.ndarray
    projection: np.ndarray
    oblique_clip: np.ndarray
    blit: Rect
    overscan: float
    polygon: SilhouettePolygon
    stale: dict
    events: tuple = ()
    fov: FovReport | None = None
    frozen: bool = False
    mirror_width: float = 0.0
    mirror_height: float = 0.0

    def validate(self):
        for name in ("view", "projection", "oblique_clip"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"frame {self.tick}: non-finite {name}")
        self.polygon.validate()
        return self

    def geometry_dict(self) -> dict:
        """The pose-derived payload, without tick/time bookkeeping."""
        return {
            "view": _col_major(self.view),
            "proj": _col_major(self.projection),
            "clip": [float(v) for v in self.oblique_clip],
            "blit": {
                "u_min": self.blit.u_min,
                "v_min": self.blit.v_min,
                "u_max": self.blit.u_max,
                "v_max": self.blit.v_max,
            },
            "overscan": self.overscan,
            "polygon": {
                "outline": [[float(u), float(v)] for u, v in self.polygon.outline],
                "opacity": self.polygon.opacity,
                "variant": self.polygon.variant.value,
                "capsules": [
                    {"a": list(map(float, c.a)), "b": list(map(float, c.b)),
                     "r": float(c.radius)}
                    for c in self.polygon.arm_capsules
                ],
            },
            "mirror": {"width": self.mirror_width, "height": self.mirror_height},
            "fov": self.fov.to_dict() if self.fov else None,
        }

    def to_json_dict(self) -> dict:
        doc = self.geometry_dict()
        doc.update(
            {
                "tick": self.tick,
                "t_us": self.timestamp_us,
                "stale": {k: bool(v) for k, v in sorted(self.stale.items())},
                "frozen": self.frozen,
                "events": [e.to_dict() for e in self.events],
            }
        )
        return doc

    def to_json(self) -> str:
        return json.dumps({"type": "frame", **self.to_json_dict()},
                          sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()

    def geometry_digest(self) -> str:
        blob = json.dumps(self.geometry_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _col_major(m: np.ndarray) -> list:
    return [float(v) for v in np.asarray(m).flatten(order="F")]
