"""Bingham-distribution filter for relative orientation.

The relative orientation between two rigidly connected gyroscopes is
tracked as a Bingham density B(q; A) proportional to exp(q^T A q) over unit
quaternions.  Each pair of simultaneous angular-velocity readings
(w_i, w_j) adds a linear constraint H(w_i, w_j) q = 0 that holds exactly
when w_i = R(q) w_j, so the information update is

    A <- gamma * A + dA,    dA = -0.5 * H^T inv(Sigma_H) H,

where Sigma_H propagates the gyro noise covariances through H for a
quaternion uniformly distributed on the unit sphere.  The mode of the
distribution is the eigenvector of A with the largest eigenvalue.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .quat import quat_canonicalize, quat_to_rotation
from .transforms import skew

_IDENTITY_QUAT = np.array([1.0, 0.0, 0.0, 0.0])


def h_matrix(a, b) -> np.ndarray:
    """Constraint matrix with H(a, b) q = 0 iff a = R(q) b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != (3,) or b.shape != (3,):
        raise InvalidInputError("h_matrix expects two 3-vectors")
    d = a - b
    h = np.empty((4, 4))
    h[0, 0] = 0.0
    h[0, 1:] = -d
    h[1:, 0] = d
    h[1:, 1:] = skew(a + b)
    return h


def uniform_quat_covariance() -> np.ndarray:
    """Second moment of a quaternion uniform on the unit 3-sphere."""
    return 0.25 * np.eye(4)


def _check_cov(c, name):
    c = np.asarray(c, dtype=float)
    if c.shape != (3, 3):
        raise InvalidInputError("%s must be a 3x3 covariance" % name)
    if np.linalg.norm(c - c.T) > 1e-9 * max(1.0, np.abs(c).max()):
        raise InvalidInputError("%s must be symmetric" % name)
    w = np.linalg.eigvalsh(c)
    if w[0] < -1e-10 * max(1.0, w[-1]):
        raise InvalidInputError("%s must be positive semidefinite" % name)
    return c


def sigma_h(cov_a, cov_b) -> np.ndarray:
    """Covariance of H(a + ea, b + eb) q for noise (ea, eb) and uniform q.

    cov_a and cov_b are the angular-velocity noise covariances of the two
    sensors.  H is linear in (a, b), so stacking the six basis responses
    N = [H(e1,0) ... H(0,e3)] gives Sigma_H = N (blkdiag(cov_a, cov_b)
    (x) Sigma_q) N^T with Sigma_q the uniform-quaternion second moment.
    """
    cov_a = _check_cov(cov_a, "cov_a")
    cov_b = _check_cov(cov_b, "cov_b")
    eye3 = np.eye(3)
    zero = np.zeros(3)
    blocks = [h_matrix(eye3[i], zero) for i in range(3)]
    blocks += [h_matrix(zero, eye3[i]) for i in range(3)]
    n = np.hstack(blocks)  # 4 x 24
    b6 = np.zeros((6, 6))
    b6[:3, :3] = cov_a
    b6[3:, 3:] = cov_b
    return n @ np.kron(b6, uniform_quat_covariance()) @ n.T


def _regularized_inverse(cov):
    # zero sensor noise makes Sigma_H singular; nudge it invertible
    w = np.linalg.eigvalsh(cov)
    if w[0] <= 1e-12 * max(1.0, w[-1]):
        cov = cov + 1e-12 * np.eye(4)
    return np.linalg.inv(cov)


@dataclass
class BinghamState:
    """Information matrix of the orientation posterior plus update inputs."""

    sigma_h_inv: np.ndarray
    gamma: float = 1.0
    a: np.ndarray = field(default_factory=lambda: np.zeros((4, 4)))
    n_updates: int = 0

    @classmethod
    def from_noise(cls, cov_omega_a, cov_omega_b, gamma: float = 1.0):
        if not 0.0 < gamma <= 1.0:
            raise InvalidInputError("gamma must be in (0, 1]")
        return cls(
            sigma_h_inv=_regularized_inverse(sigma_h(cov_omega_a, cov_omega_b)),
            gamma=gamma,
        )


def bingham_update(state: BinghamState, omega_i, omega_j) -> BinghamState:
    """Fold one simultaneous angular-velocity pair into the posterior."""
    h = h_matrix(omega_i, omega_j)
    da = -0.5 * h.T @ state.sigma_h_inv @ h
    a = state.gamma * state.a + da
    a = 0.5 * (a + a.T)  # keep exactly symmetric against float drift
    return BinghamState(
        sigma_h_inv=state.sigma_h_inv,
        gamma=state.gamma,
        a=a,
        n_updates=state.n_updates + 1,
    )


def bingham_mode(state: BinghamState):
    """Mode quaternion and eigenvalues (descending) of the posterior.

    A degenerate top eigenvalue (including the uninformed A = 0) leaves the
    mode undetermined; the canonical identity quaternion is returned and the
    zero eigenvalue gap marks the estimate as unconverged.
    """
    w, v = np.linalg.eigh(state.a)
    w = w[::-1]
    v = v[:, ::-1]
    scale = max(1.0, float(np.abs(w).max()))
    if w[0] - w[1] <= 1e-12 * scale:
        return _IDENTITY_QUAT.copy(), w
    return quat_canonicalize(v[:, 0]), w


def mode_rotation(state: BinghamState) -> np.ndarray:
    """Rotation matrix of the current mode (j-frame to i-frame)."""
    q, _ = bingham_mode(state)
    return quat_to_rotation(q)


def orientation_dispersion(eigvals) -> float:
    """Small-angle standard deviation implied by the top eigenvalue gap.

    Near the mode, A contributes exp(-(l1 - l2) * theta^2 / ...) for a
    perturbation angle theta about the weakest axis, giving an angular
    standard deviation of 1 / sqrt(2 (l1 - l2)).  Infinite when the gap
    vanishes (no orientation information).
    """
    w = np.sort(np.asarray(eigvals, dtype=float))[::-1]
    gap = w[0] - w[1]
    if gap <= 0.0:
        return np.inf
    return 1.0 / np.sqrt(2.0 * gap)
