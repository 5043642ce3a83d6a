"""
Real Lambert W function on both real branches.

W(x) solves w * exp(w) = x. The principal branch W0 is defined on
[-1/e, inf) with W0 >= -1; the lower branch W-1 is defined on [-1/e, 0)
with W-1 <= -1.

Initial guesses use the series about the branch point -1/e or the log
asymptote, then Halley iteration converges in a handful of steps.
Entries that do not converge are finished by bisection.
"""

import math
from enum import Enum
from typing import Union

import numpy as np
from scipy.optimize import bisect

from config import get_config
from utils.error_handling import DomainError
from utils.logging_config import log_warning

ArrayLike = Union[float, np.ndarray]

BRANCH_POINT = -math.exp(-1.0)

# Arguments that fall below -1/e by rounding only are snapped onto it.
_BRANCH_SNAP = 1e-15
_NEAR_BRANCH = 0.25
_EPS = np.finfo(float).eps


class Branch(Enum):
    PRINCIPAL = 0
    NEGATIVE = -1


def _check_domain(branch: Branch, x: np.ndarray) -> np.ndarray:
    if np.any(np.isnan(x)):
        raise DomainError("Lambert W argument is NaN")
    if np.any(x < BRANCH_POINT - _BRANCH_SNAP):
        raise DomainError(
            "Lambert W is real only for x >= -1/e", details=f"min x={float(np.min(x))}"
        )
    if branch is Branch.NEGATIVE and np.any(x >= 0):
        raise DomainError(
            "Lower branch W-1 is defined only for x in [-1/e, 0)",
            details=f"max x={float(np.max(x))}",
        )
    if branch is Branch.PRINCIPAL and np.any(np.isinf(x)):
        raise DomainError("Lambert W argument must be finite")
    return np.maximum(x, BRANCH_POINT)


def _initial_guess(branch: Branch, x: np.ndarray) -> np.ndarray:
    near = x + math.exp(-1.0) <= _NEAR_BRANCH
    with np.errstate(invalid="ignore", divide="ignore"):
        # Series about the branch point
        p = np.sqrt(np.maximum(2.0 * (math.e * x + 1.0), 0.0))
        if branch is Branch.NEGATIVE:
            p = -p
        series = -1.0 + p - p**2 / 3.0 + 11.0 / 72.0 * p**3 - 43.0 / 540.0 * p**4

        if branch is Branch.PRINCIPAL:
            big = x >= 3.0
            L1 = np.log(np.where(big, x, 3.0))
            L2 = np.log(L1)
            asymptote = np.where(big, L1 - L2 + L2 / L1, np.log1p(np.maximum(x, -0.5)))
        else:
            L1 = np.log(-np.where(x < 0, x, -1e-300))
            L2 = np.log(-np.minimum(L1, -1.0))
            asymptote = L1 - L2 + L2 / L1

    return np.where(near, series, asymptote)


def _halley(x: np.ndarray, w: np.ndarray, max_iters: int):
    converged = np.zeros(x.shape, dtype=bool)
    for _ in range(max_iters):
        active = ~converged
        if not active.any():
            break
        wa = w[active]
        xa = x[active]
        ew = np.exp(wa)
        f = wa * ew - xa
        w1 = wa + 1.0
        # residual already at rounding level
        done = np.abs(f) <= 2.0 * _EPS * np.abs(xa)
        with np.errstate(invalid="ignore", divide="ignore"):
            denom = ew * w1 - (wa + 2.0) * f / (2.0 * w1)
            dw = np.where(done | (w1 == 0), 0.0, f / denom)
        dw = np.where(np.isfinite(dw), dw, 0.0)
        w[active] = wa - dw
        converged[active] = done | (np.abs(dw) <= 4e-16 * (1.0 + np.abs(wa)))
    return w, converged


def _bisection_fallback(branch: Branch, value: float) -> float:
    def residual(w):
        return w * math.exp(w) - value

    if branch is Branch.PRINCIPAL:
        lo, hi = -1.0, max(math.log1p(max(value, 0.0)), 0.0) + 1.0
    else:
        lo, hi = 2.0 * math.log(-value) - 1.0, -1.0
    return bisect(residual, lo, hi, xtol=1e-300, rtol=4 * _EPS, maxiter=2000)


def lambert_w(branch: Branch, x: ArrayLike) -> ArrayLike:
    """W_branch(x) elementwise; a float for scalar input."""
    branch = Branch(branch)
    scalar = np.ndim(x) == 0
    values = _check_domain(branch, np.atleast_1d(np.asarray(x, dtype=float)).copy())

    w = _initial_guess(branch, values)
    w, converged = _halley(values, w, get_config("solver")["lambert_max_iters"])

    if not converged.all():
        stuck = np.flatnonzero(~converged.reshape(-1))
        log_warning("Halley iteration did not converge; finishing by bisection", count=stuck.size)
        flat_w = w.reshape(-1)
        flat_x = values.reshape(-1)
        for i in stuck:
            flat_w[i] = _bisection_fallback(branch, float(flat_x[i]))
        w = flat_w.reshape(values.shape)

    # keep each branch on its side of -1
    if branch is Branch.PRINCIPAL:
        w = np.maximum(w, -1.0)
    else:
        w = np.minimum(w, -1.0)

    return float(w[0]) if scalar else w
