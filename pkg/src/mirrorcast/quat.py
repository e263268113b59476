"""Unit-quaternion helpers (w, x, y, z order, right-handed)."""

import math

import numpy as np

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])

UNIT_NORM_TOL = 1e-6


def normalize(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = float(np.linalg.norm(q))
    if n == 0.0 or not math.isfinite(n):
        raise ValueError("cannot normalize zero/non-finite quaternion")
    return q / n


def is_unit(q, tol: float = UNIT_NORM_TOL) -> bool:
    return abs(float(np.linalg.norm(q)) - 1.0) <= tol


def from_axis_angle(axis, angle_rad: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    half = 0.5 * angle_rad
    return np.concatenate(([math.cos(half)], math.sin(half) * axis))


def multiply(a, b) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def to_matrix(q) -> np.ndarray:
    """3x3 rotation matrix for column vectors."""
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def rotate(q, v) -> np.ndarray:
    return to_matrix(q) @ np.asarray(v, dtype=float)


def slerp(q0, q1, t: float) -> np.ndarray:
    """Spherical interpolation along the shorter arc; output is unit norm."""
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    dot = float(np.dot(q0, q1))
    if dot < 0.0:
        q1 = -q1
        dot = -dot
    if dot > 1.0 - 1e-12:
        # nearly parallel: linear blend avoids 0/0 in sin
        return normalize(q0 + t * (q1 - q0))
    theta = math.acos(min(dot, 1.0))
    s = math.sin(theta)
    return (math.sin((1.0 - t) * theta) / s) * q0 + (math.sin(t * theta) / s) * q1
