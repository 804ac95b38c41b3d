"""Savitzky-Golay filtering for non-uniformly sampled streams.

Each output sample comes from a local least-squares polynomial fitted to a
window of 2N+1 samples around the nearest stream sample, so irregular
timestamps are handled without resampling.  The fitted polynomial also
provides the time derivative and interpolation at arbitrary query times,
which is how two sensor streams with different clocks are aligned.

Multi-channel data is fitted jointly: one Vandermonde factorization per
window, shared across channels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, InvalidInputError


@dataclass(frozen=True)
class SgConfig:
    """Polynomial degree and half window of the local fit.

    The window holds 2 * half_window + 1 samples and must overdetermine the
    polynomial, i.e. 2 * half_window + 1 > poly_degree.
    """

    poly_degree: int = 5
    half_window: int = 3

    def __post_init__(self):
        if self.poly_degree < 1 or self.half_window < 1:
            raise InvalidInputError("poly_degree and half_window must be >= 1")
        if self.window_size <= self.poly_degree:
            raise InvalidInputError(
                "window of %d samples cannot fit degree %d"
                % (self.window_size, self.poly_degree)
            )

    @property
    def window_size(self) -> int:
        return 2 * self.half_window + 1


@dataclass
class SgWindow:
    """Local polynomial p(t) = sum_i coefficients[i] * (t - center_time)**i."""

    center_time: float
    coefficients: np.ndarray  # (poly_degree + 1, channels)
    span: tuple  # (first, last) timestamp covered by the window


def _check_times(times, min_len):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1:
        raise InvalidInputError("timestamps must be a 1-D array")
    if times.size < min_len:
        raise InsufficientDataError(
            "need at least %d samples, got %d" % (min_len, times.size)
        )
    dt = np.diff(times)
    if np.any(dt == 0.0):
        raise InvalidInputError("duplicate timestamps in stream")
    if np.any(dt < 0.0):
        raise InvalidInputError("timestamps must be sorted increasing")
    return times


def _as_channels(values, n):
    values = np.asarray(values, dtype=float)
    squeeze = values.ndim == 1
    if squeeze:
        values = values[:, None]
    if values.ndim != 2 or values.shape[0] != n:
        raise InvalidInputError("values must have one row per timestamp")
    return values, squeeze

def _fit_batch(times, values, centers, config):
    """Least-squares polynomial per window, QR-based.

    times: (n,), values: (n, d), centers: (m,) window-center indices.
    Returns coefficients (m, M+1, d) in seconds units and spans (m, 2).

    Window times are rescaled to [-1, 1] before the solve; the plain
    normal equations on second-based powers square an already large
    condition number, while the rescaled QR route stays well conditioned.
    """
    nh = config.half_window
    width = config.window_size
    order = config.poly_degree + 1
    offsets = np.arange(-nh, nh + 1)
    idx = centers[:, None] + offsets[None, :]  # (m, width)
    twin = times[idx]
    dt = twin - times[centers][:, None]
    scale = np.max(np.abs(dt), axis=1)
    scale[scale == 0.0] = 1.0
    s = dt / scale[:, None]
    a = s[:, :, None] ** np.arange(order)[None, None, :]  # (m, width, order)
    q, r = np.linalg.qr(a)
    rhs = np.einsum("mwo,mwd->mod", q, values[idx])
    coeff = np.linalg.solve(r, rhs)  # (m, order, d)
    coeff /= scale[:, None, None] ** np.arange(order)[None, :, None]
    spans = np.stack([twin[:, 0], twin[:, -1]], axis=1)
    return coeff, spans


def fit_window(timestamps, values, config: SgConfig = SgConfig()) -> SgWindow:
    """Fit one window of exactly 2N+1 samples; center is the middle sample."""
    times = _check_times(timestamps, config.window_size)
    if times.size != config.window_size:
        raise InvalidInputError(
            "fit_window expects exactly %d samples" % config.window_size
        )
    values, squeeze = _as_channels(values, times.size)
    coeff, spans = _fit_batch(
        times, values, np.array([config.half_window]), config
    )
    return SgWindow(
        center_time=float(times[config.half_window]),
        coefficients=coeff[0, :, 0] if squeeze else coeff[0],
        span=(float(spans[0, 0]), float(spans[0, 1])),
    )


def value_at(window: SgWindow, t: float) -> np.ndarray:
    dt = float(t) - window.center_time
    return np.polynomial.polynomial.polyval(dt, window.coefficients)


def derivative_at(window: SgWindow, t: float) -> np.ndarray:
    dt = float(t) - window.center_time
    dcoeff = np.polynomial.polynomial.polyder(window.coefficients)
    return np.polynomial.polynomial.polyval(dt, dcoeff)


def interpolate_to(times, values, query_times, config: SgConfig = SgConfig()):
    """Evaluate the stream's local polynomials at arbitrary query times.

    Returns (values, derivatives, extrapolated): arrays of shape
    (len(query_times), channels) plus a boolean mask.  Queries outside the
    span of every window are clamped to the nearer span endpoint of the
    closest window and flagged extrapolated.
    """
    times = _check_times(times, config.window_size)
    n = times.size
    values, squeeze = _as_channels(values, n)
    query = np.atleast_1d(np.asarray(query_times, dtype=float))

    # fit in a time base anchored at the stream start for conditioning
    t0 = times[0]
    times = times - t0
    query = query - t0

    nh = config.half_window
    centers = np.arange(nh, n - nh)
    coeff, spans = _fit_batch(times, values, centers, config)

    # nearest valid window center per query
    pos = np.searchsorted(times, query)
    lo = np.clip(pos - 1, 0, n - 1)
    hi = np.clip(pos, 0, n - 1)
    nearest = np.where(
        np.abs(query - times[lo]) <= np.abs(times[hi] - query), lo, hi
    )
    widx = np.clip(nearest, nh, n - 1 - nh) - nh

    t_eff = np.clip(query, spans[widx, 0], spans[widx, 1])
    extrapolated = t_eff != query
    dt = t_eff - times[widx + nh]

    order = config.poly_degree + 1
    powers = dt[:, None] ** np.arange(order)[None, :]
    c = coeff[widx]  # (q, order, d)
    out_val = np.einsum("qo,qod->qd", powers, c)
    dpowers = powers[:, :-1] * np.arange(1, order)[None, :]
    out_der = np.einsum("qo,qod->qd", dpowers, c[:, 1:, :])

    if squeeze:
        out_val = out_val[:, 0]
        out_der = out_der[:, 0]
    return out_val, out_der, extrapolated


def smooth_stream(times, values, config: SgConfig = SgConfig()):
    """Smoothed values and derivatives at the stream's own timestamps.

    The first and last half_window samples are evaluated off-center from
    the nearest full window.
    """
    vals, ders, _ = interpolate_to(times, values, times, config)
    return vals, ders
