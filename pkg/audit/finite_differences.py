"""
Central finite differences for functions of the UAV position.

``f`` takes x and y arrays of equal shape and returns values of that
shape, so a whole batch of points is differenced at once. ``h`` may be a
scalar or an array matching x.
"""

from typing import Callable, Tuple

import numpy as np

PlaneFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


def central_gradient(f: PlaneFunction, x, y, h) -> Tuple[np.ndarray, np.ndarray]:
    x, y, h = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, h)))
    gx = (f(x + h, y) - f(x - h, y)) / (2.0 * h)
    gy = (f(x, y + h) - f(x, y - h)) / (2.0 * h)
    return gx, gy


def central_hessian(f: PlaneFunction, x, y, h) -> np.ndarray:
    """Hessian of shape x.shape + (2, 2)."""
    x, y, h = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, h)))
    center = f(x, y)
    hxx = (f(x + h, y) - 2.0 * center + f(x - h, y)) / (h * h)
    hyy = (f(x, y + h) - 2.0 * center + f(x, y - h)) / (h * h)
    hxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h)
    return np.stack([np.stack([hxx, hxy], axis=-1), np.stack([hxy, hyy], axis=-1)], axis=-2)


def relative_error(analytic, numeric, scale=None) -> np.ndarray:
    """|analytic - numeric| / scale, with scale defaulting to |analytic|."""
    analytic = np.asarray(analytic, dtype=float)
    if scale is None:
        scale = np.abs(analytic)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.abs(analytic - np.asarray(numeric, dtype=float)) / np.asarray(scale, dtype=float)
