"""Session configuration: one JSON document drives the whole pipeline.

Flags > file > defaults. Unknown keys are rejected so typos surface at
validate time instead of silently running defaults.
"""

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .. import quat
from ..errors import ConfigError
from ..geometry import MirrorFrame, MountOffset
from ..silhouette import BodyModel, ShapeVariant, SilhouetteShape

PANEL_24_WIDTH = 0.5313124474311252
PANEL_24_HEIGHT = 0.29886325168000794

PROTOCOL_VERSION = 1


@dataclass
class SessionConfig:
    mirror_width: float = PANEL_24_WIDTH
    mirror_height: float = PANEL_24_HEIGHT
    # static glass placement used until a mirror tracker pose arrives
    mirror_origin: tuple = (0.0, 0.0, 0.0)
    mirror_quat: tuple = (1.0, 0.0, 0.0, 0.0)
    # tracker-to-glass mount; None picks the top-edge-centered default
    mount_translation: tuple | None = None
    mount_rotation: tuple = (1.0, 0.0, 0.0, 0.0)
    shoulder_half_width: float = 0.25
    head_radius: float = 0.12
    arm_radius: float = 0.06
    shape_variant: str = "default_oval"
    shape_opacity: float | None = None  # None: the variant's preset value
    shape_width_scale: float | None = None
    smoothing_tau: float = 0.03
    tick_rate: float = 90.0
    near: float = 0.05
    far: float = 100.0
    overscan: float = 1.3
    deterministic: bool = False
    host: str = "127.0.0.1"
    ingest_port: int = 47800
    serve_port: int = 47801
    # eye sits forward of and below the cap tracker (tracker-local, -z forward)
    cap_to_eye: tuple = (0.0, -0.05, -0.10)
    floor_y: float = 0.0
    staleness_window_s: float = 0.2
    teleport_threshold: float = 10.0
    background_luminance: float | None = None
    room_half_extent: float = 3.0
    room_height: float = 2.5

    def validate(self) -> "SessionConfig":
        def need(cond, name, why):
            if not cond:
                raise ConfigError(f"field {name}: {why}")

        need(self.mirror_width > 0, "mirror_width", "must be positive")
        need(self.mirror_height > 0, "mirror_height", "must be positive")
        need(10 <= self.tick_rate <= 240, "tick_rate", "must be in [10, 240]")
        need(0 < self.near < self.far, "near/far", "requires 0 < near < far")
        need(self.overscan >= 1.0, "overscan", "must be >= 1")
        need(0 <= self.smoothing_tau <= 0.5, "smoothing_tau", "must be in [0, 0.5]")
        need(self.staleness_window_s > 0, "staleness_window_s", "must be positive")
        need(self.teleport_threshold > 0, "teleport_threshold", "must be positive")
        need(0 <= self.ingest_port <= 65535, "ingest_port", "must be a port number")
        need(0 <= self.serve_port <= 65535, "serve_port", "must be a port number")
        need(len(self.mirror_origin) == 3, "mirror_origin", "must be a 3-vector")
        need(len(self.mirror_quat) == 4, "mirror_quat", "must be a quaternion")
        need(
            abs(np.linalg.norm(np.asarray(self.mirror_quat)) - 1.0) <= 1e-6,
            "mirror_quat", "must have unit norm",
        )
        need(len(self.cap_to_eye) == 3, "cap_to_eye", "must be a 3-vector")
        if self.background_luminance is not None:
            need(0 <= self.background_luminance <= 1, "background_luminance", "must be in [0,1]")
        try:
            ShapeVariant(self.shape_variant)
        except ValueError:
            raise ConfigError(
                f"field shape_variant: unknown variant {self.shape_variant!r}, "
                f"expected one of {[v.value for v in ShapeVariant]}"
            )
        try:
            self.body().validate()
        except ValueError as exc:
            raise ConfigError(f"field body: {exc}")
        try:
            self.shape().validate()
        except ValueError as exc:
            raise ConfigError(f"field shape: {exc}")
        if self.mount_translation is not None:
            need(len(self.mount_translation) == 3, "mount_translation", "must be a 3-vector")
        need(len(self.mount_rotation) == 4, "mount_rotation", "must be a quaternion")
        return self

    def body(self) -> BodyModel:
        return BodyModel(
            shoulder_half_width=self.shoulder_half_width,
            head_radius=self.head_radius,
            arm_radius=self.arm_radius,
        )

    def shape(self) -> SilhouetteShape:
        preset = SilhouetteShape.preset(ShapeVariant(self.shape_variant))
        return SilhouetteShape(
            variant=preset.variant,
            opacity=preset.opacity if self.shape_opacity is None else self.shape_opacity,
            width_scale=(
                preset.width_scale if self.shape_width_scale is None else self.shape_width_scale
            ),
        )

    def mount_offset(self) -> MountOffset:
        if self.mount_translation is None:
            return MountOffset.top_edge_centered(self.mirror_width, self.mirror_height)
        return MountOffset(
            translation=np.asarray(self.mount_translation, dtype=float),
            rotation=np.asarray(self.mount_rotation, dtype=float),
        )

    def static_mirror_frame(self) -> MirrorFrame:
        return MirrorFrame(
            origin=np.asarray(self.mirror_origin, dtype=float),
            basis=quat.to_matrix(np.asarray(self.mirror_quat, dtype=float)),
            width=self.mirror_width,
            height=self.mirror_height,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "SessionConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"field {sorted(unknown)[0]}: unknown configuration key")
        coerced = dict(doc)
        for key in ("mirror_origin", "mirror_quat", "cap_to_eye", "mount_rotation"):
            if key in coerced and coerced[key] is not None:
                coerced[key] = tuple(coerced[key])
        if coerced.get("mount_translation") is not None:
            coerced["mount_translation"] = tuple(coerced["mount_translation"])
        try:
            return cls(**coerced).validate()
        except TypeError as exc:
            raise ConfigError(str(exc))

    @classmethod
    def from_file(cls, path) -> "SessionConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}")
        if not isinstance(doc, dict):
            raise ConfigError(f"config file {path} must contain a JSON object")
        return cls.from_dict(doc)

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
