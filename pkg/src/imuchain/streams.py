"""Containers for raw IMU data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


@dataclass
class ImuStream:
    """A single sensor's log: timestamps plus gyro and accelerometer rows.

    times are seconds, strictly increasing; gyro rad/s, accel m/s^2, both
    in the sensor's own frame with shape (n, 3).
    """

    imu_id: str
    times: np.ndarray
    gyro: np.ndarray
    accel: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.gyro = np.asarray(self.gyro, dtype=float)
        self.accel = np.asarray(self.accel, dtype=float)
        n = self.times.size
        if self.times.ndim != 1:
            raise InvalidInputError("times must be 1-D")
        if self.gyro.shape != (n, 3) or self.accel.shape != (n, 3):
            raise InvalidInputError("gyro and accel must have shape (n, 3)")
        if n > 1 and np.any(np.diff(self.times) <= 0.0):
            raise InvalidInputError("times must be strictly increasing")
        if not (np.all(np.isfinite(self.gyro)) and np.all(np.isfinite(self.accel))
                and np.all(np.isfinite(self.times))):
            raise InvalidInputError("stream contains non-finite values")

    def __len__(self) -> int:
        return self.times.size

    def slice_time(self, t_lo: float, t_hi: float) -> "ImuStream":
        """Samples with t_lo <= t <= t_hi."""
        m = (self.times >= t_lo) & (self.times <= t_hi)
        return ImuStream(self.imu_id, self.times[m], self.gyro[m], self.accel[m])
