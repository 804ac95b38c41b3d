import numpy as np
import pytest

from imuchain.calibration import CalibrationProfile
from imuchain.simulator import (
    ChainSpec,
    ImuMount,
    LinkSpec,
    NoiseSpec,
    TrajectorySpec,
    sinusoid,
)
from imuchain.transforms import RigidTransform

GYRO_SIGMA = 0.005  # rad/s
ACCEL_SIGMA = 0.05  # m/s^2
ROD_LENGTH = 0.2  # m


def rod_chain(spacing: float = ROD_LENGTH) -> ChainSpec:
    """Rigid bar on a two-axis gimbal, one IMU near each end."""
    return ChainSpec(
        links=(
            LinkSpec(joint_axis=np.array([0.0, 0.0, 1.0])),
            LinkSpec(joint_axis=np.array([0.0, 1.0, 0.0])),
        ),
        imu_mounts=(
            ImuMount("base_side", 1, RigidTransform(translation=np.array([0.05, 0.0, 0.0]))),
            ImuMount("tip_side", 1, RigidTransform(translation=np.array([0.05 + spacing, 0.0, 0.0]))),
        ),
    )


def rod_trajectory(duration: float = 60.0, sample_rate: float = 85.0) -> TrajectorySpec:
    return TrajectorySpec(
        joints=(sinusoid(0.15, 1.2), sinusoid(0.12, 0.8, phase=1.0)),
        duration=duration,
        sample_rate=sample_rate,
    )


def rod_noise(seed: int = 0) -> NoiseSpec:
    return NoiseSpec(
        gyro_noise_cov=GYRO_SIGMA**2,
        accel_noise_cov=ACCEL_SIGMA**2,
        seed=seed,
    )


def known_noise_profile() -> CalibrationProfile:
    return CalibrationProfile(
        Sigma_omega=GYRO_SIGMA**2 * np.eye(3),
        Sigma_f=ACCEL_SIGMA**2 * np.eye(3),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_rotation(rng) -> np.ndarray:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])
