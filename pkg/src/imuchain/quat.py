"""Quaternion algebra on plain numpy arrays.

Convention: scalar-first (w, x, y, z), Hamilton product, right-handed.
A unit quaternion q rotates a vector by the sandwich product
q * (0, v) * conj(q); `quat_to_rotation` returns the equivalent matrix.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError


def _as_quat(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (4,):
        raise InvalidInputError("quaternion must be a 4-vector (w, x, y, z)")
    return q


def quat_multiply(q1, q2) -> np.ndarray:
    """Hamilton product q1 * q2."""
    q1 = _as_quat(q1)
    q2 = _as_quat(q2)
    w1, v1 = q1[0], q1[1:]
    w2, v2 = q2[0], q2[1:]
    out = np.empty(4)
    out[0] = w1 * w2 - v1 @ v2
    out[1:] = w1 * v2 + w2 * v1 + np.cross(v1, v2)
    return out


def quat_conjugate(q) -> np.ndarray:
    q = _as_quat(q)
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_normalize(q) -> np.ndarray:
    q = _as_quat(q)
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise InvalidInputError("cannot normalize a zero quaternion")
    return q / n


def quat_canonicalize(q) -> np.ndarray:
    """Fix the sign ambiguity: w > 0, or first nonzero component positive."""
    q = _as_quat(q)
    for c in q:
        if c != 0.0:
            return q if c > 0.0 else -q
    return q


def quat_from_axis_angle(axis, angle) -> np.ndarray:
    a = np.asarray(axis, dtype=float)
    n = np.linalg.norm(a)
    if n < 1e-12:
        raise InvalidInputError("rotation axis must be nonzero")
    half = 0.5 * float(angle)
    out = np.empty(4)
    out[0] = np.cos(half)
    out[1:] = np.sin(half) * a / n
    return out


def quat_to_rotation(q) -> np.ndarray:
    """Rotation matrix of a (not necessarily normalized) quaternion."""
    w, x, y, z = quat_normalize(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def rotation_to_quat(r) -> np.ndarray:
    """Quaternion of a rotation matrix (canonical sign)."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        raise InvalidInputError("rotation must be 3x3")
    # Shepperd's method: pick the largest of the four squared components.
    tr = np.trace(r)
    q = np.empty(4)
    choices = [tr, r[0, 0], r[1, 1], r[2, 2]]
    case = int(np.argmax(choices))
    if case == 0:
        s = np.sqrt(tr + 1.0) * 2.0
        q[0] = 0.25 * s
        q[1] = (r[2, 1] - r[1, 2]) / s
        q[2] = (r[0, 2] - r[2, 0]) / s
        q[3] = (r[1, 0] - r[0, 1]) / s
    elif case == 1:
        s = np.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2]) * 2.0
        q[0] = (r[2, 1] - r[1, 2]) / s
        q[1] = 0.25 * s
        q[2] = (r[0, 1] + r[1, 0]) / s
        q[3] = (r[0, 2] + r[2, 0]) / s
    elif case == 2:
        s = np.sqrt(1.0 - r[0, 0] + r[1, 1] - r[2, 2]) * 2.0
        q[0] = (r[0, 2] - r[2, 0]) / s
        q[1] = (r[0, 1] + r[1, 0]) / s
        q[2] = 0.25 * s
        q[3] = (r[1, 2] + r[2, 1]) / s
    else:
        s = np.sqrt(1.0 - r[0, 0] - r[1, 1] + r[2, 2]) * 2.0
        q[0] = (r[1, 0] - r[0, 1]) / s
        q[1] = (r[0, 2] + r[2, 0]) / s
        q[2] = (r[1, 2] + r[2, 1]) / s
        q[3] = 0.25 * s
    return quat_canonicalize(q / np.linalg.norm(q))


def quat_rotate(q, v) -> np.ndarray:
    """Rotate v by q via the sandwich product."""
    q = quat_normalize(q)
    p = np.concatenate([[0.0], np.asarray(v, dtype=float)])
    return quat_multiply(quat_multiply(q, p), quat_conjugate(q))[1:]


def quat_angle(q1, q2=None) -> float:
    """Rotation angle of q1 (or between q1 and q2), radians in [0, pi]."""
    q1 = quat_normalize(q1)
    if q2 is None:
        dot = q1[0]
    else:
        dot = q1 @ quat_normalize(q2)
    return 2.0 * float(np.arccos(np.clip(abs(dot), 0.0, 1.0)))
