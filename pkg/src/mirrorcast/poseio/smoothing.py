"""Exponential pose smoothing with an exact time-constant response.

Positions are filtered with gain 1 - exp(-dt/tau) so the step response is the
textbook exponential regardless of sample spacing; orientations pass through
unfiltered (head orientation barely matters for the geometry and filtering
quaternions adds lag where it is most visible).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..geometry import Entity, Pose
from .wire import PoseMessage

log = logging.getLogger(__name__)

MAX_TAU = 0.5


@dataclass
class SmootherState:
    """Per-entity filter memory: position/velocity estimates and timestamps."""

    position: np.ndarray
    velocity: np.ndarray
    orientation: tuple
    timestamp_us: int


class PoseSmoother:
    """Per-entity exponential filter over an incoming message stream."""

    def __init__(self, tau: float = 0.03):
        if not 0.0 <= tau <= MAX_TAU:
            raise ValueError(f"tau {tau} outside [0, {MAX_TAU}]")
        self.tau = tau
        self.states: dict[Entity, SmootherState] = {}
        self.dropped = 0

    def smooth(self, msg: PoseMessage) -> Pose:
        """Filtered pose for the message; out-of-order input is dropped."""
        raw = np.array(msg.position, dtype=float)
        state = self.states.get(msg.entity)
        if state is None:
            state = SmootherState(position=raw, velocity=np.zeros(3),
                                  orientation=msg.orientation,
                                  timestamp_us=msg.timestamp_us)
            self.states[msg.entity] = state
            return self._pose(msg.entity, state)
        if msg.timestamp_us < state.timestamp_us:
            self.dropped += 1
            log.warning(
                "dropped out-of-order %s message (%d < %d), %d dropped so far",
                msg.entity.value, msg.timestamp_us, state.timestamp_us, self.dropped,
            )
            return self._pose(msg.entity, state)
        dt = (msg.timestamp_us - state.timestamp_us) * 1e-6
        if self.tau == 0.0:
            alpha = 1.0
        elif dt == 0.0:
            alpha = 0.0  # duplicate timestamp carries no new time
        else:
            alpha = 1.0 - math.exp(-dt / self.tau)
        raw_velocity = (raw - state.position) / dt if dt > 0 else np.zeros(3)
        state.velocity = state.velocity + alpha * (raw_velocity - state.velocity)
        state.position = state.position + alpha * (raw - state.position)
        state.orientation = msg.orientation
        state.timestamp_us = msg.timestamp_us
        return self._pose(msg.entity, state)

    @staticmethod
    def _pose(entity: Entity, state: SmootherState) -> Pose:
        return Pose(
            entity=entity,
            position=state.position.copy(),
            orientation=np.array(state.orientation),
            timestamp_us=state.timestamp_us,
        )
