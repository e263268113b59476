"""mirrorcast: view-dependent mirror geometry and frame streaming for
one-way-mirror VR spectating."""

__version__ = "0.1.0"

from . import analysis, frustum, geometry, poseio, quat, silhouette
from .geometry import Entity, MirrorFrame, MountOffset, Pose
from .session import FrameUpdate, SessionConfig, SessionEngine, SessionServer

__all__ = [
    "Entity",
    "FrameUpdate",
    "MirrorFrame",
    "MountOffset",
    "Pose",
    "SessionConfig",
    "SessionEngine",
    "SessionServer",
    "analysis",
    "frustum",
    "geometry",
    "poseio",
    "quat",
    "silhouette",
]
