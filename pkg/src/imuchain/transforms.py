"""Small helpers for rotations and rigid transforms.

Rotation matrices map child-frame coordinates to parent-frame coordinates.
RigidTransform composes the same way: (T1 @ T2).apply(x) == T1.apply(T2.apply(x)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError


def skew(v) -> np.ndarray:
    """Cross-product matrix: skew(v) @ u == np.cross(v, u)."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def axis_angle_rotation(axis, angle) -> np.ndarray:
    """Rodrigues formula for a fixed unit axis.

    `angle` may be a scalar or an array; the result has shape
    angle.shape + (3, 3).
    """
    a = np.asarray(axis, dtype=float)
    n = np.linalg.norm(a)
    if not np.isfinite(n) or abs(n - 1.0) > 1e-9:
        raise InvalidInputError("rotation axis must be a unit vector")
    k = skew(a)
    angle = np.asarray(angle, dtype=float)
    s = np.sin(angle)[..., None, None]
    c = (1.0 - np.cos(angle))[..., None, None]
    return np.eye(3) + s * k + c * (k @ k)


def rotation_angle(r1, r2=None) -> float:
    """Geodesic angle of r1 (or between r1 and r2), in radians."""
    r = np.asarray(r1, dtype=float)
    if r2 is not None:
        r = r.T @ np.asarray(r2, dtype=float)
    c = 0.5 * (np.trace(r) - 1.0)
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def _check_rotation(r):
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        raise InvalidInputError("rotation must be 3x3")
    if np.linalg.norm(r.T @ r - np.eye(3)) > 1e-6 or np.linalg.det(r) < 0.0:
        raise InvalidInputError("matrix is not a proper rotation")
    return r


def rotation_to_rpy(r) -> np.ndarray:
    """Fixed-axis roll/pitch/yaw (x, y, z) with R = Rz(yaw) Ry(pitch) Rx(roll)."""
    r = np.asarray(r, dtype=float)
    sp = -r[2, 0]
    if abs(sp) > 1.0 - 1e-12:
        # gimbal lock: roll and yaw share an axis, put everything in yaw
        pitch = np.pi / 2.0 if sp > 0 else -np.pi / 2.0
        return np.array([0.0, pitch, np.arctan2(-r[0, 1], r[1, 1])])
    return np.array(
        [
            np.arctan2(r[2, 1], r[2, 2]),
            np.arcsin(sp),
            np.arctan2(r[1, 0], r[0, 0]),
        ]
    )


def rpy_to_rotation(rpy) -> np.ndarray:
    roll, pitch, yaw = np.asarray(rpy, dtype=float)
    rx = axis_angle_rotation([1.0, 0.0, 0.0], roll)
    ry = axis_angle_rotation([0.0, 1.0, 0.0], pitch)
    rz = axis_angle_rotation([0.0, 0.0, 1.0], yaw)
    return rz @ ry @ rx


@dataclass(frozen=True)
class RigidTransform:
    """Rotation plus translation, composed with ``@``."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "rotation", _check_rotation(self.rotation))
        t = np.asarray(self.translation, dtype=float)
        if t.shape != (3,):
            raise InvalidInputError("translation must be a 3-vector")
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls()

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation)

    def apply(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return p @ self.rotation.T + self.translation

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def to_dict(self) -> dict:
        return {
            "rotation": self.rotation.tolist(),
            "translation": self.translation.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RigidTransform":
        return cls(np.asarray(d["rotation"], dtype=float),
                   np.asarray(d["translation"], dtype=float))
