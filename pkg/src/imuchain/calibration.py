"""Sensor calibration from a stationary segment and a slow-rotation segment.

The stationary segment provides the gyro bias and the noise covariances of
the gyro, its filtered derivative, and the accelerometer.  The rotation
segment sweeps gravity through the accelerometer's frame; the readings then
lie on an ellipsoid whose center is the accelerometer bias and whose shape
matrix straightens scale and cross-axis errors so that corrected readings
have norm g_mag.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConstraintFailureError,
    DegenerateDataError,
    InsufficientDataError,
    InvalidInputError,
    NotStationaryError,
)
from .sgolay import SgConfig, smooth_stream
from .streams import ImuStream

STANDARD_GRAVITY = 9.80665
MIN_STATIONARY_SAMPLES = 100
MOTION_THRESHOLD = 0.05  # rad/s


@dataclass
class CalibrationProfile:
    """Per-sensor correction parameters and noise statistics."""

    gyro_bias: np.ndarray = field(default_factory=lambda: np.zeros(3))
    Sigma_omega: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    Sigma_omega_dot: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    Sigma_f: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    accel_bias: np.ndarray = field(default_factory=lambda: np.zeros(3))
    accel_shape: np.ndarray = field(default_factory=lambda: np.eye(3))
    g_mag: float = STANDARD_GRAVITY

    def __post_init__(self):
        for name, shape in (
            ("gyro_bias", (3,)),
            ("Sigma_omega", (3, 3)),
            ("Sigma_omega_dot", (3, 3)),
            ("Sigma_f", (3, 3)),
            ("accel_bias", (3,)),
            ("accel_shape", (3, 3)),
        ):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != shape:
                raise InvalidInputError("%s must have shape %s" % (name, shape))
            setattr(self, name, v)
        if self.g_mag <= 0.0:
            raise InvalidInputError("g_mag must be positive")

    @classmethod
    def identity(cls, g_mag: float = STANDARD_GRAVITY) -> "CalibrationProfile":
        return cls(g_mag=g_mag)

    def to_dict(self) -> dict:
        return {
            "gyro_bias": self.gyro_bias.tolist(),
            "Sigma_omega": self.Sigma_omega.tolist(),
            "Sigma_omega_dot": self.Sigma_omega_dot.tolist(),
            "Sigma_f": self.Sigma_f.tolist(),
            "accel_bias": self.accel_bias.tolist(),
            "accel_shape": self.accel_shape.tolist(),
            "g_mag": self.g_mag,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CalibrationProfile":
        return cls(
            gyro_bias=d["gyro_bias"],
            Sigma_omega=d["Sigma_omega"],
            Sigma_omega_dot=d["Sigma_omega_dot"],
            Sigma_f=d["Sigma_f"],
            accel_bias=d["accel_bias"],
            accel_shape=d["accel_shape"],
            g_mag=float(d.get("g_mag", STANDARD_GRAVITY)),
        )

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "CalibrationProfile":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def stationary_stats(stream: ImuStream, sg_config: SgConfig = SgConfig(),
                     motion_threshold: float = MOTION_THRESHOLD):
    """Gyro bias and noise covariances from a motionless recording.

    Returns (gyro_bias, Sigma_omega, Sigma_omega_dot, Sigma_f).  The
    derivative covariance is measured on the filtered derivative of the
    gyro stream, i.e. through the same path the estimator uses.
    """
    n = len(stream)
    if n < MIN_STATIONARY_SAMPLES:
        raise InsufficientDataError(
            "stationary segment needs >= %d samples, got %d"
            % (MIN_STATIONARY_SAMPLES, n)
        )
    std = stream.gyro.std(axis=0, ddof=1)
    if np.any(std > motion_threshold):
        raise NotStationaryError(
            "gyro std %.4f rad/s exceeds motion threshold %.4f"
            % (float(std.max()), motion_threshold)
        )
    bias = stream.gyro.mean(axis=0)
    _, gyro_dot = smooth_stream(stream.times, stream.gyro, sg_config)
    sigma_omega = np.cov(stream.gyro, rowvar=False, ddof=1)
    sigma_omega_dot = np.cov(gyro_dot, rowvar=False, ddof=1)
    sigma_f = np.cov(stream.accel, rowvar=False, ddof=1)
    return bias, sigma_omega, sigma_omega_dot, sigma_f


@dataclass(frozen=True)
class QuadricParams:
    """Coefficients of a X^2 + b XY + c XZ + d Y^2 + e YZ + f Z^2
    + p X + q Y + r Z + s = 0, normalized to unit Euclidean norm."""

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float
    p: float
    q: float
    r: float
    s: float
    constrained: bool = False  # True when the ellipsoid-restricted solve ran

    def as_vector(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d, self.e,
                         self.f, self.p, self.q, self.r, self.s])

    def quadratic_form(self):
        """(E, l, s) with the surface x^T E x + l . x + s = 0."""
        e = np.array(
            [
                [self.a, self.b / 2.0, self.c / 2.0],
                [self.b / 2.0, self.d, self.e / 2.0],
                [self.c / 2.0, self.e / 2.0, self.f],
            ]
        )
        return e, np.array([self.p, self.q, self.r]), self.s


def _quadric_from_vector(v, constrained):
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    if v[0] + v[3] + v[5] < 0.0:  # fix overall sign: trace of E positive
        v = -v
    return QuadricParams(*v, constrained=constrained)


def _is_ellipsoid(quadric) -> bool:
    e, l, s = quadric.quadratic_form()
    w = np.linalg.eigvalsh(e)
    if w[0] <= 1e-12 * max(1.0, w[-1]):
        return False
    center = -0.5 * np.linalg.solve(e, l)
    return center @ e @ center - s > 0.0


def _design_matrix(points):
    x, y, z = points[:, 0], points[:, 1], points[:, 2]
    return np.column_stack(
        [x * x, x * y, x * z, y * y, y * z, z * z, x, y, z, np.ones_like(x)]
    )


def _constrained_ellipsoid_vector(points):
    """Ellipsoid-specific least squares via a generalized eigenproblem.

    Works in the parameterization u = (a, b, c, f, g, h, p, q, r, d) of
    a x^2 + b y^2 + c z^2 + 2f yz + 2g xz + 2h xy + 2p x + 2q y + 2r z + d
    where the constraint 4J - I^2 = 1 (k = 4) forces a real ellipsoid.
    """
    x, y, z = points[:, 0], points[:, 1], points[:, 2]
    d = np.column_stack(
        [x * x, y * y, z * z, 2 * y * z, 2 * x * z, 2 * x * y,
         2 * x, 2 * y, 2 * z, np.ones_like(x)]
    )
    s = d.T @ d
    s11, s12, s22 = s[:6, :6], s[:6, 6:], s[6:, 6:]
    k = 4.0
    c1 = np.array(
        [
            [-1.0, k / 2 - 1, k / 2 - 1, 0, 0, 0],
            [k / 2 - 1, -1.0, k / 2 - 1, 0, 0, 0],
            [k / 2 - 1, k / 2 - 1, -1.0, 0, 0, 0],
            [0, 0, 0, -k, 0, 0],
            [0, 0, 0, 0, -k, 0],
            [0, 0, 0, 0, 0, -k],
        ]
    )
    m = np.linalg.solve(c1, s11 - s12 @ np.linalg.solve(s22, s12.T))
    w, v = np.linalg.eig(m)
    real = np.abs(w.imag) <= 1e-9 * np.abs(w).max()
    positive = real & (w.real > 0.0)
    if not np.any(positive):
        raise ConstraintFailureError(
            "ellipsoid-constrained fit has no admissible solution"
        )
    u1 = v[:, np.argmax(np.where(positive, w.real, -np.inf))].real
    u2 = -np.linalg.solve(s22, s12.T) @ u1
    a, b, c, f, g, h = u1
    p, q, r, dd = u2
    # back to the (a..f, p, q, r, s) coefficient ordering used here
    return np.array([a, 2 * h, 2 * g, b, 2 * f, c, 2 * p, 2 * q, 2 * r, dd])


def ellipsoid_fit(points) -> QuadricParams:
    """Least-squares ellipsoid through a 3-D point cloud.

    Solves min |D v| with |v| = 1 first; if that quadric is not an
    ellipsoid, re-solves with the ellipsoid-specific constraint.  The
    constrained answer is accepted only if it fits nearly as well as the
    unconstrained optimum, so genuinely non-elliptic data (e.g. points on
    a hyperboloid) raises ConstraintFailureError instead of returning a
    badly fitting surface.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 3:
        raise InvalidInputError("points must have shape (n, 3)")
    if points.shape[0] < 10:
        raise InsufficientDataError("ellipsoid fit needs at least 10 points")
    centered = points - points.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[-1] <= 1e-6 * sv[0]:
        raise DegenerateDataError("points do not span 3-D space")

    d = _design_matrix(points)
    _, _, vt = np.linalg.svd(d, full_matrices=False)
    free = _quadric_from_vector(vt[-1], constrained=False)
    if _is_ellipsoid(free):
        return free

    vec = _constrained_ellipsoid_vector(points)
    constrained = _quadric_from_vector(vec, constrained=True)
    if not _is_ellipsoid(constrained):
        raise ConstraintFailureError("constrained fit is not an ellipsoid")
    # algebraic residual over gradient norm approximates point-to-surface
    # distance; data that no ellipsoid can fit sits far from the best one
    e, l, _ = constrained.quadratic_form()
    grad = 2.0 * points @ e + l
    grad_norm = np.maximum(np.linalg.norm(grad, axis=1), 1e-12)
    dist = np.abs(d @ constrained.as_vector()) / grad_norm
    radius = np.sqrt(np.mean(np.sum((points - points.mean(axis=0)) ** 2, axis=1)))
    rms_dist = np.sqrt(np.mean(dist**2))
    if rms_dist > 0.05 * radius:
        raise ConstraintFailureError(
            "no ellipsoid fits the data: rms surface distance %.3g "
            "is %.1f%% of the cloud radius" % (rms_dist, 100.0 * rms_dist / radius)
        )
    return constrained


def quadric_to_calibration(quadric: QuadricParams,
                           g_mag: float = STANDARD_GRAVITY):
    """Accelerometer bias and shape matrix from a fitted ellipsoid.

    Returns (accel_bias, accel_shape) such that
    |accel_shape @ (raw - accel_bias)| == g_mag for raw readings on the
    fitted surface.
    """
    if g_mag <= 0.0:
        raise InvalidInputError("g_mag must be positive")
    e, l, s = quadric.quadratic_form()
    if e[0, 0] + e[1, 1] + e[2, 2] < 0.0:
        e, l, s = -e, -l, -s
    w, v = np.linalg.eigh(e)
    if w[0] <= 0.0:
        raise InvalidInputError("quadric is not an ellipsoid")
    center = -0.5 * np.linalg.solve(e, l)
    k = center @ e @ center - s
    if k <= 0.0:
        raise InvalidInputError("quadric has no real ellipsoid surface")
    # (x - center)^T (E / k) (x - center) = 1; shape = g * sqrt(E / k)
    shape = (v * np.sqrt(w / k)) @ v.T * g_mag
    return center, shape


def apply_calibration(stream: ImuStream,
                      profile: CalibrationProfile) -> ImuStream:
    """Bias-correct the gyro and straighten the accelerometer readings."""
    gyro = stream.gyro - profile.gyro_bias
    accel = (stream.accel - profile.accel_bias) @ profile.accel_shape.T
    return ImuStream(stream.imu_id, stream.times.copy(), gyro, accel)


def build_profile(stationary: ImuStream, rotation: ImuStream,
                  sg_config: SgConfig = SgConfig(),
                  g_mag: float = STANDARD_GRAVITY,
                  motion_threshold: float = MOTION_THRESHOLD) -> CalibrationProfile:
    """Full profile from the two calibration segments of one sensor."""
    bias, s_omega, s_omega_dot, s_f = stationary_stats(
        stationary, sg_config, motion_threshold
    )
    quadric = ellipsoid_fit(rotation.accel)
    accel_bias, accel_shape = quadric_to_calibration(quadric, g_mag)
    return CalibrationProfile(
        gyro_bias=bias,
        Sigma_omega=s_omega,
        Sigma_omega_dot=s_omega_dot,
        Sigma_f=s_f,
        accel_bias=accel_bias,
        accel_shape=accel_shape,
        g_mag=g_mag,
    )
