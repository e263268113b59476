from .smoothing import PoseSmoother, SmootherState
from .store import DEFAULT_WINDOW_US, PoseStore, Snapshot
from .trace import PoseTrace, TraceHeader, TraceRecorder, replay, replay_sync
from .wire import PoseMessage, decode, decode_handshake, encode, encode_handshake

__all__ = [
    "DEFAULT_WINDOW_US",
    "PoseMessage",
    "PoseSmoother",
    "PoseStore",
    "PoseTrace",
    "SmootherState",
    "Snapshot",
    "TraceHeader",
    "TraceRecorder",
    "decode",
    "decode_handshake",
    "encode",
    "encode_handshake",
    "replay",
    "replay_sync",
]
