"""
THz channel, rate and delay kernels.

Every kernel accepts scalars or NumPy arrays (broadcast elementwise) and
returns a float for scalar input.
"""

import math
from typing import Union

import numpy as np

from model.types import RadioConstants, UserSpec
from utils.error_handling import DomainError

ArrayLike = Union[float, np.ndarray]

LN2 = math.log(2.0)


def _out(value: np.ndarray) -> ArrayLike:
    return float(value) if np.ndim(value) == 0 else value


def distance(user: UserSpec, x: ArrayLike, y: ArrayLike, H: float) -> ArrayLike:
    """UAV–user distance sqrt((x-x_n)^2 + (y-y_n)^2 + H^2); always >= H."""
    if not H > 0:
        raise DomainError("UAV altitude must be positive", details=f"H={H}")
    dx = np.asarray(x, dtype=float) - user.x
    dy = np.asarray(y, dtype=float) - user.y
    return _out(np.sqrt(dx * dx + dy * dy + H * H))


def distances(positions: np.ndarray, x: ArrayLike, y: ArrayLike, H: float) -> np.ndarray:
    """Distances from UAV placements (any shape S) to all users: shape S + (N,)."""
    if not H > 0:
        raise DomainError("UAV altitude must be positive", details=f"H={H}")
    xs = np.asarray(x, dtype=float)[..., None]
    ys = np.asarray(y, dtype=float)[..., None]
    dx = xs - positions[:, 0]
    dy = ys - positions[:, 1]
    return np.sqrt(dx * dx + dy * dy + H * H)


def _check_positive(name: str, value: ArrayLike) -> np.ndarray:
    array = np.asarray(value, dtype=float)
    if not np.all(array > 0):
        raise DomainError(f"{name} must be positive", details=f"{name}={value}")
    return array


def channel_gain(d: ArrayLike, a: float) -> ArrayLike:
    """h = d^-2 e^{-a d}."""
    d = _check_positive("distance", d)
    return _out(np.exp(-a * d) / (d * d))


def snr_per_watt_hz(d: ArrayLike, radio: RadioConstants) -> ArrayLike:
    """h0 / (d^2 e^{a d} sigma2) in Hz/W, i.e. k_n * w_n; independent of bandwidth."""
    d = _check_positive("distance", d)
    return _out(radio.gain_over_noise * np.exp(-radio.a * d) / (d * d))


def snr_coefficient(w: ArrayLike, d: ArrayLike, radio: RadioConstants) -> ArrayLike:
    """k = h0 / (w d^2 e^{a d} sigma2) in 1/W."""
    w = _check_positive("bandwidth", w)
    return _out(np.asarray(snr_per_watt_hz(d, radio)) / w)


def link_rate(power: ArrayLike, w: ArrayLike, k: ArrayLike) -> ArrayLike:
    """w log2(1 + k p): the rate kernel shared by uplink and downlink."""
    power = np.asarray(power, dtype=float)
    if np.any(power < 0):
        raise DomainError("Transmit power must be nonnegative", details=f"p={power}")
    w = _check_positive("bandwidth", w)
    k = _check_positive("SNR coefficient", k)
    return _out(w * np.log1p(k * power) / LN2)


def uplink_rate(p: ArrayLike, w: ArrayLike, k: ArrayLike) -> ArrayLike:
    """Uplink rate with user power p."""
    return link_rate(p, w, k)


def downlink_rate(q: ArrayLike, w: ArrayLike, k: ArrayLike) -> ArrayLike:
    """Downlink rate with UAV power q."""
    return link_rate(q, w, k)


def transmission_delay(payload: ArrayLike, rate: ArrayLike) -> ArrayLike:
    """payload / rate, with +inf where the rate is zero."""
    payload = _check_positive("payload", payload)
    rate = np.asarray(rate, dtype=float)
    if np.any(rate < 0):
        raise DomainError("Rate must be nonnegative", details=f"rate={rate}")
    with np.errstate(divide="ignore"):
        delay = np.where(rate > 0, payload / np.where(rate > 0, rate, 1.0), np.inf)
    return _out(delay)


def uplink_delay(D: ArrayLike, rate: ArrayLike) -> ArrayLike:
    return transmission_delay(D, rate)


def downlink_delay(E: ArrayLike, rate: ArrayLike) -> ArrayLike:
    return transmission_delay(E, rate)


def rate_per_hz_log(power: ArrayLike, alpha: ArrayLike, w: ArrayLike) -> np.ndarray:
    """ln(1 + alpha p / w) without validation, for solver inner loops."""
    return np.log1p(np.asarray(alpha) * np.asarray(power) / np.asarray(w))
