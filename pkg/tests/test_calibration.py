import numpy as np
import pytest

from imuchain.calibration import (
    STANDARD_GRAVITY,
    CalibrationProfile,
    apply_calibration,
    build_profile,
    ellipsoid_fit,
    quadric_to_calibration,
    stationary_stats,
)
from imuchain.errors import (
    ConstraintFailureError,
    DegenerateDataError,
    InsufficientDataError,
    InvalidInputError,
    NotStationaryError,
)
from imuchain.streams import ImuStream

from conftest import random_rotation

G = STANDARD_GRAVITY


def make_stream(times, gyro, accel, imu_id="cal"):
    return ImuStream(imu_id, times, gyro, accel)


def sphere_points(rng, n, radius=G, center=np.zeros(3), distortion=None):
    dirs = rng.normal(size=(n, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = dirs * radius
    if distortion is not None:
        pts = pts @ distortion.T
    return pts + center


def spd_distortion(rng, spread=0.1):
    w = rng.uniform(1.0 - spread, 1.0 + spread, 3)
    v = np.linalg.qr(rng.normal(size=(3, 3)))[0]
    if np.linalg.det(v) < 0:
        v[:, 0] *= -1.0
    return v @ np.diag(w) @ v.T


def test_stationary_stats_constant_stream_zero_covariance():
    times = np.arange(200) / 100.0
    gyro = np.tile([0.01, -0.02, 0.005], (200, 1))
    accel = np.tile([0.0, 0.0, G], (200, 1))
    bias, s_w, s_wd, s_f = stationary_stats(make_stream(times, gyro, accel))
    np.testing.assert_allclose(bias, [0.01, -0.02, 0.005], atol=1e-15)
    assert np.abs(s_w).max() < 1e-20
    assert np.abs(s_wd).max() < 1e-16
    assert np.abs(s_f).max() < 1e-20


def test_stationary_stats_recovers_gaussian_covariance(rng):
    n = 10_000
    times = np.arange(n) / 100.0
    cov_w = np.diag([4e-6, 9e-6, 1e-6])
    cov_f = np.diag([4e-4, 1e-4, 2.5e-4])
    gyro = rng.normal(size=(n, 3)) * np.sqrt(np.diag(cov_w)) + [0.002, 0.0, -0.001]
    accel = rng.normal(size=(n, 3)) * np.sqrt(np.diag(cov_f)) + [0.0, 0.0, G]
    bias, s_w, _, s_f = stationary_stats(make_stream(times, gyro, accel))
    np.testing.assert_allclose(bias, [0.002, 0.0, -0.001], atol=1e-4)
    assert np.linalg.norm(s_w - cov_w) < 0.1 * np.linalg.norm(cov_w)
    assert np.linalg.norm(s_f - cov_f) < 0.1 * np.linalg.norm(cov_f)


def test_stationary_stats_rejects_motion(rng):
    n = 500
    times = np.arange(n) / 100.0
    gyro = np.column_stack([np.sin(2.0 * times), np.zeros(n), np.zeros(n)])
    accel = np.tile([0.0, 0.0, G], (n, 1))
    with pytest.raises(NotStationaryError):
        stationary_stats(make_stream(times, gyro, accel))


def test_stationary_stats_rejects_short_segment():
    times = np.arange(50) / 100.0
    data = np.zeros((50, 3))
    with pytest.raises(InsufficientDataError):
        stationary_stats(make_stream(times, data, data))


def test_ellipsoid_fit_sphere_coefficient_pattern(rng):
    pts = sphere_points(rng, 400, radius=2.0)
    quad = ellipsoid_fit(pts)
    # x^2 + y^2 + z^2 - R^2 = 0 up to scale: equal diagonal terms, no
    # cross or linear terms, s = -R^2 a
    assert abs(quad.a - quad.d) < 1e-9
    assert abs(quad.a - quad.f) < 1e-9
    for term in (quad.b, quad.c, quad.e, quad.p, quad.q, quad.r):
        assert abs(term) < 1e-9
    np.testing.assert_allclose(quad.s, -4.0 * quad.a, atol=1e-9)


def test_ellipsoid_fit_recovers_shifted_center(rng):
    center = np.array([0.3, -0.2, 0.5])
    pts = sphere_points(rng, 500, radius=G, center=center)
    bias, shape = quadric_to_calibration(ellipsoid_fit(pts))
    np.testing.assert_allclose(bias, center, atol=1e-6)
    np.testing.assert_allclose(shape, np.eye(3), atol=1e-6)


def test_ellipsoid_fit_rotation_equivariance(rng):
    m = spd_distortion(rng)
    pts = sphere_points(rng, 600, distortion=m, center=np.array([0.1, 0.2, -0.1]))
    rot = random_rotation(rng)
    b1, s1 = quadric_to_calibration(ellipsoid_fit(pts))
    b2, s2 = quadric_to_calibration(ellipsoid_fit(pts @ rot.T))
    np.testing.assert_allclose(b2, rot @ b1, atol=1e-6)
    np.testing.assert_allclose(s2, rot @ s1 @ rot.T, atol=1e-6)


def test_ellipsoid_fit_rejects_planar_points(rng):
    pts = sphere_points(rng, 300)
    pts[:, 2] = 0.0
    with pytest.raises(DegenerateDataError):
        ellipsoid_fit(pts)


def test_ellipsoid_fit_rejects_hyperboloid(rng):
    # points on x^2 + y^2 - z^2 = 1
    u = rng.uniform(0.0, 2.0 * np.pi, 800)
    v = rng.uniform(-1.5, 1.5, 800)
    pts = np.column_stack([np.cosh(v) * np.cos(u), np.cosh(v) * np.sin(u), np.sinh(v)])
    with pytest.raises(ConstraintFailureError):
        ellipsoid_fit(pts)


def test_ellipsoid_fit_rejects_few_points(rng):
    with pytest.raises(InsufficientDataError):
        ellipsoid_fit(sphere_points(rng, 9))


def test_constrained_path_used_for_thin_coverage(rng):
    # a polar cap leaves the unconstrained quadric free to wander; the
    # constrained solve must still return an ellipsoid for on-surface data
    z = rng.uniform(0.9, 1.0, 1500)
    phi = rng.uniform(0.0, 2.0 * np.pi, 1500)
    s = np.sqrt(1.0 - z * z)
    pts = np.column_stack([s * np.cos(phi), s * np.sin(phi), z]) * G
    pts += rng.normal(scale=0.02, size=pts.shape)
    quad = ellipsoid_fit(pts)
    e, _, _ = quad.quadratic_form()
    assert np.linalg.eigvalsh(e)[0] > 0.0


def test_calibration_round_trip_noiseless(rng):
    m = spd_distortion(rng)
    bias = rng.uniform(-0.3, 0.3, 3)
    raw = sphere_points(rng, 10_000, distortion=m) + bias
    b_hat, shape = quadric_to_calibration(ellipsoid_fit(raw))
    shape_ref = np.linalg.inv(m)
    assert np.linalg.norm(b_hat - bias) / np.linalg.norm(bias) < 1e-4
    assert np.linalg.norm(shape - shape_ref) / np.linalg.norm(shape_ref) < 1e-4


def test_calibration_round_trip_noisy(rng):
    m = spd_distortion(rng)
    bias = rng.uniform(-0.3, 0.3, 3)
    raw = sphere_points(rng, 10_000, distortion=m) + bias
    raw += rng.normal(scale=0.02, size=raw.shape)
    b_hat, shape = quadric_to_calibration(ellipsoid_fit(raw))
    shape_ref = np.linalg.inv(m)
    assert np.linalg.norm(b_hat - bias) / np.linalg.norm(bias) < 0.01
    assert np.linalg.norm(shape - shape_ref) / np.linalg.norm(shape_ref) < 0.01


def test_apply_calibration_normalizes_gravity(rng):
    m = spd_distortion(rng)
    bias = rng.uniform(-0.2, 0.2, 3)
    n = 2_000
    raw = sphere_points(rng, n, distortion=m) + bias
    profile = CalibrationProfile(
        gyro_bias=np.array([0.01, -0.02, 0.03]),
        accel_bias=bias,
        accel_shape=np.linalg.inv(m),
    )
    stream = make_stream(
        np.arange(n) / 100.0,
        np.tile([0.01, -0.02, 0.03], (n, 1)),
        raw,
    )
    out = apply_calibration(stream, profile)
    norms = np.linalg.norm(out.accel, axis=1)
    assert np.abs(norms - G).max() < 0.01 * G
    assert np.abs(out.gyro).max() < 1e-12


def test_build_profile_from_segments(rng):
    m = spd_distortion(rng, spread=0.05)
    bias_acc = rng.uniform(-0.2, 0.2, 3)
    bias_gyr = np.array([0.004, -0.002, 0.001])
    n_still = 600
    t_still = np.arange(n_still) / 100.0
    still = make_stream(
        t_still,
        bias_gyr + rng.normal(scale=0.002, size=(n_still, 3)),
        np.tile([0.0, 0.0, G], (n_still, 1)) @ m.T + bias_acc
        + rng.normal(scale=0.02, size=(n_still, 3)),
    )
    n_rot = 3_000
    t_rot = np.arange(n_rot) / 100.0
    f_rot = sphere_points(rng, n_rot, distortion=m) + bias_acc
    f_rot += rng.normal(scale=0.02, size=(n_rot, 3))
    rot = make_stream(
        t_rot,
        bias_gyr + rng.normal(scale=0.002, size=(n_rot, 3)),
        f_rot,
    )
    profile = build_profile(still, rot)
    assert np.linalg.norm(profile.gyro_bias - bias_gyr) < 5e-4
    assert np.linalg.norm(profile.accel_bias - bias_acc) < 0.01
    shape_ref = np.linalg.inv(m)
    assert np.linalg.norm(profile.accel_shape - shape_ref) < 0.01 * np.linalg.norm(shape_ref)


def test_profile_json_round_trip(tmp_path, rng):
    profile = CalibrationProfile(
        gyro_bias=rng.normal(size=3),
        Sigma_omega=np.diag(rng.uniform(1e-6, 1e-4, 3)),
        Sigma_omega_dot=np.diag(rng.uniform(1e-4, 1e-2, 3)),
        Sigma_f=np.diag(rng.uniform(1e-4, 1e-2, 3)),
        accel_bias=rng.normal(size=3),
        accel_shape=spd_distortion(rng),
        g_mag=9.81,
    )
    path = tmp_path / "profile.json"
    profile.save(path)
    back = CalibrationProfile.load(path)
    for name in ("gyro_bias", "Sigma_omega", "Sigma_omega_dot", "Sigma_f",
                 "accel_bias", "accel_shape"):
        np.testing.assert_array_equal(getattr(back, name), getattr(profile, name))
    assert back.g_mag == profile.g_mag


def test_profile_rejects_bad_shapes():
    with pytest.raises(InvalidInputError):
        CalibrationProfile(gyro_bias=np.zeros(2))
    with pytest.raises(InvalidInputError):
        CalibrationProfile(g_mag=-1.0)
