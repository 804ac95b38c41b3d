"""Synthetic IMU data from an analytically driven rigid-link chain.

Joint angles follow closed-form waveforms, so angular velocity, angular
acceleration, and linear acceleration are propagated down the chain exactly
rather than by numerical differentiation.  Sensor models (noise, biases,
accelerometer shape distortion) are applied per IMU with independently
seeded generators, which makes every run bit-reproducible for a given seed.

Frames: link i's frame is the child side of joint i,
X_i = X_{i-1} * joint_transform_i * Rot(axis_i, angle_i(t)), with X_{-1}
the world frame.  IMUs are mounted at fixed poses in link frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AliasingError, InvalidInputError
from .rls import MotionSample, PositionRls
from .sgolay import SgConfig, smooth_stream
from .streams import ImuStream
from .transforms import RigidTransform, axis_angle_rotation

GRAVITY = np.array([0.0, 0.0, -9.80665])


@dataclass(frozen=True)
class JointWaveform:
    """Closed-form joint angle profile.

    kind "constant": angle;  "sinusoid": angle + amplitude *
    sin(2 pi frequency t + phase);  "spin": angle + rate * t.
    """

    kind: str = "constant"
    amplitude: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0
    rate: float = 0.0
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "sinusoid", "spin"):
            raise InvalidInputError("unknown waveform kind %r" % self.kind)

    def angle_at(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "sinusoid":
            return self.angle + self.amplitude * np.sin(
                2.0 * np.pi * self.frequency * t + self.phase
            )
        if self.kind == "spin":
            return self.angle + self.rate * t
        return np.full_like(t, self.angle)

    def rate_at(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "sinusoid":
            w = 2.0 * np.pi * self.frequency
            return self.amplitude * w * np.cos(w * t + self.phase)
        if self.kind == "spin":
            return np.full_like(t, self.rate)
        return np.zeros_like(t)

    def accel_at(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "sinusoid":
            w = 2.0 * np.pi * self.frequency
            return -self.amplitude * w * w * np.sin(w * t + self.phase)
        return np.zeros_like(t)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "sinusoid":
            d.update(amplitude=self.amplitude, frequency=self.frequency,
                     phase=self.phase)
        if self.kind == "spin":
            d.update(rate=self.rate)
        if self.angle != 0.0 or self.kind == "constant":
            d.update(angle=self.angle)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "JointWaveform":
        return cls(
            kind=d.get("kind", "constant"),
            amplitude=float(d.get("amplitude", 0.0)),
            frequency=float(d.get("frequency", 0.0)),
            phase=float(d.get("phase", 0.0)),
            rate=float(d.get("rate", 0.0)),
            angle=float(d.get("angle", 0.0)),
        )


def constant(angle: float = 0.0) -> JointWaveform:
    return JointWaveform(kind="constant", angle=angle)


def sinusoid(amplitude, frequency, phase=0.0, angle=0.0) -> JointWaveform:
    return JointWaveform(kind="sinusoid", amplitude=amplitude,
                         frequency=frequency, phase=phase, angle=angle)


def spin(rate, angle=0.0) -> JointWaveform:
    return JointWaveform(kind="spin", rate=rate, angle=angle)


@dataclass(frozen=True)
class NoiseSpec:
    """Sensor error model: white noise variances, biases, shape distortion."""

    gyro_noise_cov: float = 0.0  # variance per axis, rad^2/s^2
    accel_noise_cov: float = 0.0  # variance per axis, m^2/s^4
    gyro_bias: tuple = (0.0, 0.0, 0.0)
    accel_bias: tuple = (0.0, 0.0, 0.0)
    accel_distortion: tuple = None  # 3x3 applied to true specific force
    seed: int = 0

    def __post_init__(self):
        if self.gyro_noise_cov < 0.0 or self.accel_noise_cov < 0.0:
            raise InvalidInputError("noise variances must be >= 0")

    def distortion_matrix(self) -> np.ndarray:
        if self.accel_distortion is None:
            return np.eye(3)
        m = np.asarray(self.accel_distortion, dtype=float)
        if m.shape != (3, 3):
            raise InvalidInputError("accel_distortion must be 3x3")
        return m

    def to_dict(self) -> dict:
        return {
            "gyro_noise_cov": self.gyro_noise_cov,
            "accel_noise_cov": self.accel_noise_cov,
            "gyro_bias": list(self.gyro_bias),
            "accel_bias": list(self.accel_bias),
            "accel_distortion": self.distortion_matrix().tolist(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSpec":
        return cls(
            gyro_noise_cov=float(d.get("gyro_noise_cov", 0.0)),
            accel_noise_cov=float(d.get("accel_noise_cov", 0.0)),
            gyro_bias=tuple(d.get("gyro_bias", (0.0, 0.0, 0.0))),
            accel_bias=tuple(d.get("accel_bias", (0.0, 0.0, 0.0))),
            accel_distortion=d.get("accel_distortion"),
            seed=int(d.get("seed", 0)),
        )


@dataclass(frozen=True)
class TrajectorySpec:
    """Joint waveforms plus the sampling grid."""

    joints: tuple
    duration: float
    sample_rate: float
    time_jitter: float = 0.0  # uniform +/- jitter on each timestamp, seconds

    def __post_init__(self):
        object.__setattr__(self, "joints", tuple(self.joints))
        if self.duration <= 0.0 or self.sample_rate <= 0.0:
            raise InvalidInputError("duration and sample_rate must be positive")
        if self.time_jitter < 0.0 or self.time_jitter >= 0.5 / self.sample_rate:
            if self.time_jitter != 0.0:
                raise InvalidInputError(
                    "time_jitter must stay below half the sample period"
                )

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.sample_rate))

    def sample_times(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.sample_rate

    def to_dict(self) -> dict:
        return {
            "joints": [w.to_dict() for w in self.joints],
            "duration": self.duration,
            "sample_rate": self.sample_rate,
            "time_jitter": self.time_jitter,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrajectorySpec":
        return cls(
            joints=tuple(JointWaveform.from_dict(j) for j in d["joints"]),
            duration=float(d["duration"]),
            sample_rate=float(d["sample_rate"]),
            time_jitter=float(d.get("time_jitter", 0.0)),
        )


@dataclass(frozen=True)
class LinkSpec:
    """One revolute joint: fixed offset from the previous link, then an axis."""

    joint_axis: np.ndarray
    joint_transform: RigidTransform = field(default_factory=RigidTransform)

    def __post_init__(self):
        a = np.asarray(self.joint_axis, dtype=float)
        if a.shape != (3,) or abs(np.linalg.norm(a) - 1.0) > 1e-9:
            raise InvalidInputError("joint_axis must be a unit 3-vector")
        object.__setattr__(self, "joint_axis", a)

    def to_dict(self) -> dict:
        return {
            "joint_axis": self.joint_axis.tolist(),
            "joint_transform": self.joint_transform.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinkSpec":
        return cls(
            joint_axis=np.asarray(d["joint_axis"], dtype=float),
            joint_transform=RigidTransform.from_dict(d["joint_transform"]),
        )


@dataclass(frozen=True)
class ImuMount:
    imu_id: str
    link: int
    pose: RigidTransform = field(default_factory=RigidTransform)

    def to_dict(self) -> dict:
        return {"imu_id": self.imu_id, "link": self.link,
                "pose": self.pose.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "ImuMount":
        return cls(d["imu_id"], int(d["link"]),
                   RigidTransform.from_dict(d["pose"]))


@dataclass(frozen=True)
class ChainSpec:
    links: tuple
    imu_mounts: tuple
    end_effector: RigidTransform = field(default_factory=RigidTransform)

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "imu_mounts", tuple(self.imu_mounts))
        ids = [m.imu_id for m in self.imu_mounts]
        if len(set(ids)) != len(ids):
            raise InvalidInputError("imu_ids must be unique")
        for m in self.imu_mounts:
            if not 0 <= m.link < len(self.links):
                raise InvalidInputError(
                    "mount %r references missing link %d" % (m.imu_id, m.link)
                )

    def mount(self, imu_id: str) -> ImuMount:
        for m in self.imu_mounts:
            if m.imu_id == imu_id:
                return m
        raise InvalidInputError("no IMU named %r in chain" % imu_id)

    def to_dict(self) -> dict:
        return {
            "links": [l.to_dict() for l in self.links],
            "imu_mounts": [m.to_dict() for m in self.imu_mounts],
            "end_effector": self.end_effector.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChainSpec":
        return cls(
            links=tuple(LinkSpec.from_dict(l) for l in d["links"]),
            imu_mounts=tuple(ImuMount.from_dict(m)
                             for m in d.get("imu_mounts", [])),
            end_effector=RigidTransform.from_dict(d["end_effector"])
            if "end_effector" in d else RigidTransform(),
        )


def _cross(a, b):
    return np.cross(a, b)


def _link_states(chain: ChainSpec, trajectory: TrajectorySpec, times):
    """World-frame state of every link at the given times.

    Returns a list of dicts with rotation (n,3,3), origin/acc (n,3) of the
    link frame, and world angular velocity/acceleration (n,3).  All closed
    form: each joint contributes axis * rate through the accumulated
    parent rotation, and translations ride on the parent's angular state.
    """
    times = np.asarray(times, dtype=float)
    n = times.size
    if len(trajectory.joints) != len(chain.links):
        raise InvalidInputError(
            "trajectory drives %d joints but chain has %d"
            % (len(trajectory.joints), len(chain.links))
        )
    rot = np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
    pos = np.zeros((n, 3))
    acc = np.zeros((n, 3))
    omega = np.zeros((n, 3))
    alpha = np.zeros((n, 3))
    states = []
    for link, wave in zip(chain.links, trajectory.joints):
        rj = link.joint_transform.rotation
        tj = link.joint_transform.translation
        arm = rot @ tj  # (n, 3) offset to this joint's origin, world frame
        pos = pos + arm
        acc = acc + _cross(alpha, arm) + _cross(omega, _cross(omega, arm))
        rot_pre = rot @ rj
        axis_w = rot_pre @ link.joint_axis
        th = wave.angle_at(times)
        rate = wave.rate_at(times)[:, None]
        aacc = wave.accel_at(times)[:, None]
        alpha = alpha + _cross(omega, axis_w) * rate + axis_w * aacc
        omega = omega + axis_w * rate
        rot = rot_pre @ axis_angle_rotation(link.joint_axis, th)
        states.append(
            {"rotation": rot, "origin": pos, "acc": acc,
             "omega": omega, "alpha": alpha}
        )
    return states


def imu_world_kinematics(chain: ChainSpec, trajectory: TrajectorySpec,
                         times, imu_id: str):
    """World rotation, position, acceleration and angular state of one IMU."""
    mount = chain.mount(imu_id)
    state = _link_states(chain, trajectory, times)[mount.link]
    rot_l = state["rotation"]
    arm = rot_l @ mount.pose.translation
    rot = rot_l @ mount.pose.rotation
    pos = state["origin"] + arm
    acc = (
        state["acc"]
        + _cross(state["alpha"], arm)
        + _cross(state["omega"], _cross(state["omega"], arm))
    )
    return {
        "rotation": rot,
        "position": pos,
        "acc": acc,
        "omega": state["omega"],
        "alpha": state["alpha"],
    }


def _measurements(kin, gravity):
    rot = kin["rotation"]
    gyro = np.einsum("nij,ni->nj", rot, kin["omega"])
    force = np.einsum("nij,ni->nj", rot, kin["acc"] - gravity)
    return gyro, force


def simulate_imu(chain: ChainSpec, trajectory: TrajectorySpec,
                 noise: NoiseSpec = NoiseSpec(), gravity=None) -> dict:
    """Simulate every mounted IMU; returns {imu_id: ImuStream}.

    Streams are generated with one independent generator per IMU seeded
    from (noise.seed, mount index); identical inputs give bit-identical
    output.
    """
    gravity = GRAVITY if gravity is None else np.asarray(gravity, dtype=float)
    base_times = trajectory.sample_times()
    distortion = noise.distortion_matrix()
    out = {}
    for idx, mount in enumerate(chain.imu_mounts):
        rng = np.random.default_rng([noise.seed, idx])
        times = base_times
        if trajectory.time_jitter > 0.0:
            times = base_times + rng.uniform(
                -trajectory.time_jitter, trajectory.time_jitter,
                size=base_times.size
            )
        kin = imu_world_kinematics(chain, trajectory, times, mount.imu_id)
        gyro, force = _measurements(kin, gravity)
        gyro = gyro + np.asarray(noise.gyro_bias, dtype=float)
        if noise.gyro_noise_cov > 0.0:
            gyro = gyro + rng.normal(
                0.0, math.sqrt(noise.gyro_noise_cov), size=gyro.shape
            )
        accel = force @ distortion.T + np.asarray(noise.accel_bias, dtype=float)
        if noise.accel_noise_cov > 0.0:
            accel = accel + rng.normal(
                0.0, math.sqrt(noise.accel_noise_cov), size=accel.shape
            )
        out[mount.imu_id] = ImuStream(mount.imu_id, times, gyro, accel)
    return out


def shake_trajectory(n_joints: int, joint_index: int, amplitude: float,
                     frequency: float, duration: float,
                     sample_rate: float = 85.0, phase: float = 0.0,
                     time_jitter: float = 0.0) -> TrajectorySpec:
    """Sinusoidal excitation of one joint, all others held still."""
    if frequency >= 0.5 * sample_rate:
        raise AliasingError(
            "frequency %.3g Hz is not below Nyquist (%.3g Hz)"
            % (frequency, 0.5 * sample_rate)
        )
    if not 0 <= joint_index < n_joints:
        raise InvalidInputError("joint_index out of range")
    joints = [
        sinusoid(amplitude, frequency, phase) if i == joint_index else constant()
        for i in range(n_joints)
    ]
    return TrajectorySpec(joints=tuple(joints), duration=duration,
                          sample_rate=sample_rate, time_jitter=time_jitter)


def position_gain(length: float, frequency: float, sample_rate: float,
                  sg_config: SgConfig = SgConfig(),
                  n_samples: int = 3000) -> float:
    """|r_hat| / length for a noiseless single-axis swing.

    One rigid body spins about z with angular velocity sin(2 pi f t); one
    IMU sits on the axis, the other at (length, 0, 0).  The full filter
    chain runs with the relative orientation known to be identity, so any
    shortfall in the recovered length is the filtering loss at this
    frequency-to-sample-rate ratio.
    """
    if length <= 0.0:
        raise InvalidInputError("length must be positive")
    # angle = (1 - cos(2 pi f t)) / (2 pi f) gives rate = sin(2 pi f t)
    w = 2.0 * np.pi * frequency
    wave = sinusoid(amplitude=1.0 / w, frequency=frequency, phase=-np.pi / 2.0)
    chain = ChainSpec(
        links=(LinkSpec(joint_axis=np.array([0.0, 0.0, 1.0])),),
        imu_mounts=(
            ImuMount("center", 0, RigidTransform()),
            ImuMount("tip", 0, RigidTransform(
                translation=np.array([length, 0.0, 0.0]))),
        ),
    )
    trajectory = TrajectorySpec(
        joints=(wave,), duration=n_samples / sample_rate,
        sample_rate=sample_rate,
    )
    streams = simulate_imu(chain, trajectory, NoiseSpec())
    sa, sp = streams["center"], streams["tip"]
    ga, gda = smooth_stream(sa.times, sa.gyro, sg_config)
    fa, _ = smooth_stream(sa.times, sa.accel, sg_config)
    gp, gdp = smooth_stream(sp.times, sp.gyro, sg_config)
    fp, _ = smooth_stream(sp.times, sp.accel, sg_config)
    rls = PositionRls()
    eye = np.eye(3)
    r_hat = np.zeros(3)
    for k in range(len(sa)):
        sample = MotionSample(
            t=sa.times[k], f_a=fa[k], f_p=fp[k],
            omega_a=ga[k], omega_p=gp[k],
            omega_dot_a=gda[k], omega_dot_p=gdp[k],
        )
        r_hat, _ = rls.step(sample, eye)
    return float(np.linalg.norm(r_hat) / length)


def freq_sweep(length: float, ratios, sg_config: SgConfig = SgConfig(),
               sample_rate: float = 100.0, n_samples: int = 3000):
    """Recovered-length ratio across frequency / sample-rate ratios.

    Returns a list of (ratio, length_gain) rows.
    """
    ratios = [float(r) for r in np.atleast_1d(ratios)]
    for r in ratios:
        if not 0.0 < r < 0.5:
            raise InvalidInputError("ratios must lie in (0, 0.5)")
    return [
        (r, position_gain(length, r * sample_rate, sample_rate,
                          sg_config, n_samples))
        for r in ratios
    ]
