"""Relative pose of an IMU pair from their raw streams.

The pipeline per aligned sample: calibrate both streams, Savitzky-Golay
fit to get smoothed angular velocity, its derivative, and smoothed
specific force, interpolate the second stream onto the first stream's
timestamps, update the Bingham orientation posterior, and feed its current
mode into the recursive least-squares position update.  Orientation and
position therefore converge concurrently, in sample order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bingham import (
    BinghamState,
    bingham_mode,
    bingham_update,
    orientation_dispersion,
)
from .calibration import CalibrationProfile, apply_calibration
from .errors import AlignmentError
from .quat import quat_to_rotation
from .rls import MotionSample, PositionRls, covariance_summary
from .sgolay import SgConfig, interpolate_to, smooth_stream
from .streams import ImuStream

POSITION_THRESHOLD = 0.005  # m, on twice the covariance-trace root
ORIENTATION_THRESHOLD_DEG = 0.1  # deg, on twice the angular dispersion


@dataclass(frozen=True)
class EstimationConfig:
    sg: SgConfig = field(default_factory=SgConfig)
    gamma_pos: float = 1.0
    gamma_rot: float = 1.0
    n_lag: int = 100
    eps_init: float = 1e-6
    pos_threshold: float = POSITION_THRESHOLD
    rot_threshold_deg: float = ORIENTATION_THRESHOLD_DEG
    stop_at_convergence: bool = False

    def to_dict(self) -> dict:
        return {
            "sg_poly_degree": self.sg.poly_degree,
            "sg_half_window": self.sg.half_window,
            "gamma_pos": self.gamma_pos,
            "gamma_rot": self.gamma_rot,
            "n_lag": self.n_lag,
            "eps_init": self.eps_init,
            "pos_threshold": self.pos_threshold,
            "rot_threshold_deg": self.rot_threshold_deg,
            "stop_at_convergence": self.stop_at_convergence,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EstimationConfig":
        return cls(
            sg=SgConfig(
                poly_degree=int(d.get("sg_poly_degree", 5)),
                half_window=int(d.get("sg_half_window", 3)),
            ),
            gamma_pos=float(d.get("gamma_pos", 1.0)),
            gamma_rot=float(d.get("gamma_rot", 1.0)),
            n_lag=int(d.get("n_lag", 100)),
            eps_init=float(d.get("eps_init", 1e-6)),
            pos_threshold=float(d.get("pos_threshold", POSITION_THRESHOLD)),
            rot_threshold_deg=float(
                d.get("rot_threshold_deg", ORIENTATION_THRESHOLD_DEG)
            ),
            stop_at_convergence=bool(d.get("stop_at_convergence", False)),
        )


@dataclass
class EstimateTrace:
    """Per-sample history of the pair estimate, for plotting or CSV dumps."""

    times: np.ndarray
    r_hat: np.ndarray  # (n, 3)
    position_dispersion: np.ndarray  # 2 sqrt(tr Sigma_r)
    orientation_dispersion_deg: np.ndarray  # 2 * angular std, degrees


@dataclass
class RelativePoseEstimate:
    """Pose of IMU P relative to IMU A, with uncertainty."""

    r_hat: np.ndarray
    Sigma_r: np.ndarray
    orientation_mode: np.ndarray  # quaternion (w, x, y, z), P frame -> A frame
    bingham_A: np.ndarray
    converged: bool
    n_samples: int
    trace: EstimateTrace = None
    converged_at: float = None

    @property
    def rotation(self) -> np.ndarray:
        return quat_to_rotation(self.orientation_mode)

    @property
    def position_dispersion(self) -> float:
        """95th-percentile-style position spread: 2 sqrt(tr Sigma_r)."""
        return 2.0 * covariance_summary(self.Sigma_r)

    @property
    def orientation_dispersion_deg(self) -> float:
        eig = np.linalg.eigvalsh(self.bingham_A)
        return 2.0 * np.degrees(orientation_dispersion(eig))


def stopping_criterion(estimate: RelativePoseEstimate,
                       pos_threshold: float = POSITION_THRESHOLD,
                       rot_threshold_deg: float = ORIENTATION_THRESHOLD_DEG) -> bool:
    """True once both dispersion measures are inside their thresholds."""
    return bool(
        estimate.position_dispersion < pos_threshold
        and estimate.orientation_dispersion_deg < rot_threshold_deg
    )


def _aligned_samples(stream_a: ImuStream, stream_p: ImuStream,
                     config: EstimationConfig):
    """Smoothed, time-aligned signals on stream A's clock."""
    width = config.sg.window_size
    t_lo = max(stream_a.times[0], stream_p.times[0])
    t_hi = min(stream_a.times[-1], stream_p.times[-1])
    if t_hi <= t_lo:
        raise AlignmentError("streams do not overlap in time")
    sel = (stream_a.times >= t_lo) & (stream_a.times <= t_hi)
    n_p = int(np.count_nonzero(
        (stream_p.times >= t_lo) & (stream_p.times <= t_hi)
    ))
    if int(np.count_nonzero(sel)) < width or n_p < width:
        raise AlignmentError(
            "need %d overlapping samples per stream" % width
        )
    times = stream_a.times[sel]
    gyro_a, gyro_dot_a = smooth_stream(stream_a.times, stream_a.gyro, config.sg)
    force_a, _ = smooth_stream(stream_a.times, stream_a.accel, config.sg)
    gyro_p, gyro_dot_p, _ = interpolate_to(
        stream_p.times, stream_p.gyro, times, config.sg
    )
    force_p, _, _ = interpolate_to(
        stream_p.times, stream_p.accel, times, config.sg
    )
    return {
        "times": times,
        "gyro_a": gyro_a[sel],
        "gyro_dot_a": gyro_dot_a[sel],
        "force_a": force_a[sel],
        "gyro_p": gyro_p,
        "gyro_dot_p": gyro_dot_p,
        "force_p": force_p,
    }


def pairwise_estimate(stream_a: ImuStream, stream_p: ImuStream,
                      profile_a: CalibrationProfile = None,
                      profile_p: CalibrationProfile = None,
                      config: EstimationConfig = EstimationConfig()
                      ) -> RelativePoseEstimate:
    """Estimate IMU P's pose relative to IMU A from one recording."""
    profile_a = profile_a or CalibrationProfile.identity()
    profile_p = profile_p or CalibrationProfile.identity()
    cal_a = apply_calibration(stream_a, profile_a)
    cal_p = apply_calibration(stream_p, profile_p)
    sig = _aligned_samples(cal_a, cal_p, config)

    bingham = BinghamState.from_noise(
        profile_a.Sigma_omega, profile_p.Sigma_omega, gamma=config.gamma_rot
    )
    rls = PositionRls(
        cov_omega_a=profile_a.Sigma_omega,
        cov_omega_p=profile_p.Sigma_omega,
        gamma=config.gamma_pos,
        n_lag=config.n_lag,
        eps_init=config.eps_init,
    )

    n = sig["times"].size
    tr_times = np.empty(n)
    tr_r = np.empty((n, 3))
    tr_pos = np.empty(n)
    tr_rot = np.empty(n)
    converged_at = None
    r_hat = np.zeros(3)
    cov = rls.covariance()
    mode = np.array([1.0, 0.0, 0.0, 0.0])
    eig = np.zeros(4)
    used = 0
    for k in range(n):
        bingham = bingham_update(bingham, sig["gyro_a"][k], sig["gyro_p"][k])
        mode, eig = bingham_mode(bingham)
        rot_ap = quat_to_rotation(mode)
        sample = MotionSample(
            t=sig["times"][k],
            f_a=sig["force_a"][k], f_p=sig["force_p"][k],
            omega_a=sig["gyro_a"][k], omega_p=sig["gyro_p"][k],
            omega_dot_a=sig["gyro_dot_a"][k], omega_dot_p=sig["gyro_dot_p"][k],
        )
        r_hat, cov = rls.step(sample, rot_ap)
        tr_times[k] = sig["times"][k]
        tr_r[k] = r_hat
        tr_pos[k] = 2.0 * covariance_summary(cov)
        tr_rot[k] = 2.0 * np.degrees(orientation_dispersion(eig))
        used = k + 1
        if tr_pos[k] < config.pos_threshold and tr_rot[k] < config.rot_threshold_deg:
            if converged_at is None:
                converged_at = float(sig["times"][k])
            if config.stop_at_convergence:
                break

    trace = EstimateTrace(
        times=tr_times[:used], r_hat=tr_r[:used],
        position_dispersion=tr_pos[:used],
        orientation_dispersion_deg=tr_rot[:used],
    )
    estimate = RelativePoseEstimate(
        r_hat=r_hat, Sigma_r=cov, orientation_mode=mode,
        bingham_A=bingham.a, converged=False, n_samples=used,
        trace=trace, converged_at=converged_at,
    )
    estimate.converged = stopping_criterion(
        estimate, config.pos_threshold, config.rot_threshold_deg
    )
    return estimate
