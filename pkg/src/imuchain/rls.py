"""Recursive least squares for the relative position of two IMUs.

For accelerometers A and P on one rigid body, the specific-force difference
seen from A's frame is linear in the constant offset r from A to P:

    F = R_AP f_P - f_A = (skew(w)^2 + skew(dw)) r = Omega r,

with w the angular velocity and dw its time derivative in A's frame.
Averaging Omega over both gyros and adding a correction for the quadratic
noise bias of skew(w)^2 gives the regressor; the estimate is refined
sample by sample with information-form recursive least squares, whitened
by the empirical covariance of recent residuals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InternalError, InvalidInputError
from .transforms import skew

# singular values below this fraction of the largest are treated as zero
# when inverting the residual covariance
_PINV_RCOND = 1e-10


@dataclass
class MotionSample:
    """One time-aligned pair of processed IMU readings (A frame and P frame)."""

    t: float
    f_a: np.ndarray
    f_p: np.ndarray
    omega_a: np.ndarray
    omega_p: np.ndarray
    omega_dot_a: np.ndarray
    omega_dot_p: np.ndarray

    def __post_init__(self):
        for name in ("f_a", "f_p", "omega_a", "omega_p",
                     "omega_dot_a", "omega_dot_p"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,) or not np.all(np.isfinite(v)):
                raise InvalidInputError("%s must be a finite 3-vector" % name)
            setattr(self, name, v)


def motion_matrix(omega, omega_dot) -> np.ndarray:
    """Matrix mapping a body-fixed offset to the acceleration it induces."""
    k = skew(omega)
    return k @ k + skew(omega_dot)


def averaged_motion_matrix(sample: MotionSample, rot_ap) -> np.ndarray:
    """Mean of both sensors' motion matrices, P's conjugated into A's frame."""
    ma = motion_matrix(sample.omega_a, sample.omega_dot_a)
    mp = motion_matrix(sample.omega_p, sample.omega_dot_p)
    return 0.5 * (ma + rot_ap @ mp @ rot_ap.T)


def noise_bias_correction(cov_omega_a, cov_omega_p, rot_ap) -> np.ndarray:
    """Expected value of the gyro-noise contribution to the averaged matrix.

    skew(w + e)^2 has mean skew(w)^2 + cov(e) - trace(cov(e)) * I, so adding
    this correction makes the regressor unbiased.
    """
    cov_a = np.asarray(cov_omega_a, dtype=float)
    cov_p = rot_ap @ np.asarray(cov_omega_p, dtype=float) @ rot_ap.T
    total = np.trace(cov_a) + np.trace(cov_p)
    return 0.5 * (total * np.eye(3) - (cov_a + cov_p))


def covariance_summary(cov) -> float:
    """Scalar spread: sqrt of the covariance trace."""
    tr = float(np.trace(np.asarray(cov, dtype=float)))
    if tr < 0.0:
        raise InternalError("covariance trace is negative")
    return np.sqrt(tr)


class PositionRls:
    """Information-form RLS over motion samples.

    Keeps a lag queue of prediction residuals whose sample covariance
    whitens each update; a Moore-Penrose pseudoinverse covers the early
    steps where that covariance is still rank deficient.  Pass
    residual_cov to use a fixed, known covariance instead.
    """

    def __init__(
        self,
        cov_omega_a=None,
        cov_omega_p=None,
        gamma: float = 1.0,
        n_lag: int = 100,
        eps_init: float = 1e-6,
        residual_cov=None,
    ):
        if not 0.0 < gamma <= 1.0:
            raise InvalidInputError("gamma must be in (0, 1]")
        if n_lag < 2:
            raise InvalidInputError("n_lag must be at least 2")
        if eps_init <= 0.0:
            raise InvalidInputError("eps_init must be positive")
        zero = np.zeros((3, 3))
        self.cov_omega_a = zero if cov_omega_a is None else np.asarray(cov_omega_a, dtype=float)
        self.cov_omega_p = zero if cov_omega_p is None else np.asarray(cov_omega_p, dtype=float)
        self.gamma = gamma
        self.n_lag = n_lag
        self.p_inv = eps_init * np.eye(3)
        self.q = np.zeros(3)
        self.r_hat = np.zeros(3)
        self.diffs = np.zeros((n_lag, 3))
        self._next_slot = 0
        self.n_steps = 0
        self.residual_cov = None
        if residual_cov is not None:
            self.residual_cov = np.asarray(residual_cov, dtype=float)

    def step(self, sample: MotionSample, rot_ap):
        """Fold in one motion sample; returns (r_hat, covariance)."""
        rot_ap = np.asarray(rot_ap, dtype=float)
        f = rot_ap @ sample.f_p - sample.f_a
        omega_bar = averaged_motion_matrix(sample, rot_ap)
        omega_bar += noise_bias_correction(
            self.cov_omega_a, self.cov_omega_p, rot_ap
        )

        # residual against the pre-update estimate enters the lag queue
        self.diffs[self._next_slot] = f - omega_bar @ self.r_hat
        self._next_slot = (self._next_slot + 1) % self.n_lag

        if self.residual_cov is not None:
            c = self.residual_cov
        else:
            c = np.einsum("ni,nj->ij", self.diffs, self.diffs) / (self.n_lag - 1)
        c_inv = np.linalg.pinv(c, rcond=_PINV_RCOND, hermitian=True)

        gain = omega_bar.T @ c_inv
        self.p_inv = self.p_inv + self.gamma * gain @ omega_bar
        self.q = self.q + self.gamma * gain @ f
        self.r_hat = np.linalg.solve(self.p_inv, self.q)
        self.n_steps += 1
        return self.r_hat.copy(), self.covariance()

    def covariance(self) -> np.ndarray:
        cov = np.linalg.inv(self.p_inv)
        return 0.5 * (cov + cov.T)
