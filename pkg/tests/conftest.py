import numpy as np
import pytest

from mirrorcast import quat
from mirrorcast.geometry import Entity, MirrorFrame, Pose

from .oracles import random_unit_quat


def make_pose(entity=Entity.VIEWER, pos=(0.0, 0.0, 1.0), q=None, t_us=0) -> Pose:
    return Pose(
        entity=entity,
        position=np.asarray(pos, dtype=float),
        orientation=quat.IDENTITY if q is None else np.asarray(q, dtype=float),
        timestamp_us=t_us,
    )


def random_frame(rng, min_dim=0.2, max_dim=3.0) -> MirrorFrame:
    basis = quat.to_matrix(random_unit_quat(rng))
    return MirrorFrame(
        origin=rng.uniform(-5, 5, size=3),
        basis=basis,
        width=rng.uniform(min_dim, max_dim),
        height=rng.uniform(min_dim, max_dim),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240831)
