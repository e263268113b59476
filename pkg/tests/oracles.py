"""Independent numerical oracles used by the unit and acceptance tests.

These deliberately avoid the closed forms used by the implementation:
the reflection point comes from path-length minimization (Fermat), the
rotation oracle from Rodrigues' formula, areas from the shoelace sum.
"""

import math

import numpy as np


def path_length(s, px, pz, vx, vz):
    return np.sqrt((vx - s) ** 2 + vz**2) + np.sqrt((px - s) ** 2 + pz**2)


def path_length_slope(s, px, pz, vx, vz):
    dv = np.sqrt((vx - s) ** 2 + vz**2)
    dp = np.sqrt((px - s) ** 2 + pz**2)
    return (s - vx) / dv + (s - px) / dp


def reflection_argmin(px, pz, vx, vz, tol: float = 1e-12) -> np.ndarray:
    """Brute-force minimizer of the travel path |V-S| + |S-P| over the glass.

    Vectorized over equally-shaped coordinate arrays. A golden-section pass
    shrinks the bracket first; because comparing nearly-equal path lengths
    saturates around sqrt(machine eps) near a smooth minimum, the bracket is
    then finished by bisecting the sign of the path-length derivative, which
    stays well conditioned all the way down to ``tol``.
    """
    px, pz, vx, vz = (np.asarray(a, dtype=float) for a in (px, pz, vx, vz))
    a = np.minimum(px, vx).astype(float)
    b = np.maximum(px, vx).astype(float)
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    invphi2 = (3.0 - math.sqrt(5.0)) / 2.0
    # 10 golden iterations shrink the bracket ~120x, still far above the
    # width where value comparisons become unreliable
    for _ in range(10):
        h = b - a
        c = a + invphi2 * h
        d = a + invphi * h
        left = path_length(c, px, pz, vx, vz) < path_length(d, px, pz, vx, vz)
        # minimum lies in [a, d] when the left probe wins, else in [c, b]
        b = np.where(left, d, b)
        a = np.where(left, a, c)
    # slope is monotone (the path length is strictly convex): <= 0 at a, >= 0 at b
    for _ in range(64):
        mid = 0.5 * (a + b)
        neg = path_length_slope(mid, px, pz, vx, vz) < 0.0
        a = np.where(neg, mid, a)
        b = np.where(neg, b, mid)
    return 0.5 * (a + b)


def rodrigues(axis, angle_rad: float) -> np.ndarray:
    """Rotation matrix via Rodrigues' formula (independent of quat.to_matrix)."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle_rad) * kx + (1 - math.cos(angle_rad)) * (kx @ kx)


def shoelace_area(points) -> float:
    pts = np.asarray(points, dtype=float)
    if len(pts) < 3:
        return 0.0
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def random_unit_quat(rng) -> np.ndarray:
    q = rng.normal(size=4)
    return q / np.linalg.norm(q)
