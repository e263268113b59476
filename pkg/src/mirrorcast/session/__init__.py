from .config import PROTOCOL_VERSION, SessionConfig
from .engine import SessionEngine
from .frames import FrameUpdate
from .server import SessionServer, serve_forever

__all__ = [
    "PROTOCOL_VERSION",
    "FrameUpdate",
    "SessionConfig",
    "SessionEngine",
    "SessionServer",
    "serve_forever",
]
