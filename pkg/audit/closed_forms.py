"""
Closed-form quantities behind the convexity argument for one energy term.

The term is B(e) = D p / (w log2 e) with e = 1 + h0 p / (w sigma2 d^2 e^{a d}),
viewed as a function of the UAV position through d. The user sits at the
origin and the UAV at (dx, dy, H). Every function is vectorised.

Symbols:
    A   = a d + 2
    I1  = (2e - ln e - 2) A^2 - e ln e A - 2 e ln e
    I   = I1 z + A d^2 e ln e,  z = dx^2; d2B/dx2 has the sign of I
    S   = (2e - ln e - 2) A^2 - 2 e ln e
    L   = (d^2 - H^2) S + H^2 e ln e A;  det(Hessian) has the sign of L
    g(e) = 4e - 4 - e ln e - 2 ln e
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect, brentq, newton

from model.channel import LN2
from model.types import RadioConstants
from utils.error_handling import DomainError

G_ROOT_BRACKET = (2.0, 100.0)
VERTEX_ROOT_BRACKET = (100.0, 1.0e4)


def g_function(e):
    """g(e) = 4e - 4 - e ln e - 2 ln e."""
    e_arr = np.asarray(e, dtype=float)
    if np.any(e_arr <= 0):
        raise DomainError("g(e) needs e > 0", details=f"e={e}")
    value = 4.0 * e_arr - 4.0 - e_arr * np.log(e_arr) - 2.0 * np.log(e_arr)
    return float(value) if value.ndim == 0 else value


def g_derivative(e):
    e_arr = np.asarray(e, dtype=float)
    value = 3.0 - np.log(e_arr) - 2.0 / e_arr
    return float(value) if value.ndim == 0 else value


def find_g_root(xtol: float = 1e-6) -> float:
    """Nonzero root of g, by bisection over [2, 100]."""
    return float(bisect(g_function, *G_ROOT_BRACKET, xtol=xtol))


def newton_g_root(start: float = 40.0) -> float:
    return float(newton(g_function, start, fprime=g_derivative, tol=1e-12, maxiter=100))


def vertex_function(e):
    """Minimizer in A of I1: e ln e / (2 (2e - ln e - 2))."""
    e_arr = np.asarray(e, dtype=float)
    if np.any(e_arr <= 1):
        raise DomainError("Vertex of I1 needs e > 1", details=f"e={e}")
    log_e = np.log(e_arr)
    value = e_arr * log_e / (2.0 * (2.0 * e_arr - log_e - 2.0))
    return float(value) if value.ndim == 0 else value


def find_vertex_root() -> float:
    """e at which the vertex of I1 reaches A = 2."""
    return float(brentq(lambda e: vertex_function(e) - 2.0, *VERTEX_ROOT_BRACKET, xtol=1e-9))


def I1_function(e, A):
    e = np.asarray(e, dtype=float)
    A = np.asarray(A, dtype=float)
    log_e = np.log(e)
    return (2.0 * e - log_e - 2.0) * A * A - e * log_e * A - 2.0 * e * log_e


def snr_term(d, radio: RadioConstants, p, w):
    """e = 1 + h0 p / (w sigma2 d^2 e^{a d})."""
    d = np.asarray(d, dtype=float)
    value = 1.0 + radio.gain_over_noise * np.asarray(p) / np.asarray(w) * np.exp(-radio.a * d) / (d * d)
    return float(value) if value.ndim == 0 else value


def energy_term(radio: RadioConstants, H, D, p, w, a=None):
    """B(x, y) for a user at the origin, as a function usable by finite differences."""
    a = radio.a if a is None else a

    def B(x, y):
        d = np.sqrt(x * x + y * y + H * H)
        m = radio.gain_over_noise * p / w * np.exp(-a * d) / (d * d)
        return D * p * LN2 / (w * np.log1p(m))

    return B


@dataclass(frozen=True)
class ConvexityQuantities:
    """All convexity quantities for a batch of (geometry, p, w, D) samples."""

    d: np.ndarray
    e: np.ndarray
    A: np.ndarray
    B: np.ndarray
    dB_de: np.ndarray
    d2B_de2: np.ndarray
    de_dd: np.ndarray
    d2e_dd2: np.ndarray
    d2B_dx2: np.ndarray  # chain rule
    d2B_dx2_closed: np.ndarray  # I * C (e-1) / (e^2 d^4 ln^3 e)
    I: np.ndarray
    I1: np.ndarray
    I1_min: np.ndarray
    z: np.ndarray
    z_max: np.ndarray
    z_star: np.ndarray
    z_star_min: np.ndarray
    g_of_e: np.ndarray
    S: np.ndarray
    L: np.ndarray
    L_lower: np.ndarray
    G1: np.ndarray
    hessian: np.ndarray  # (..., 2, 2)

    @classmethod
    def evaluate(cls, radio: RadioConstants, dx, dy, H, p, w, D, a=None) -> "ConvexityQuantities":
        """``a`` overrides the absorption coefficient per sample."""
        a = radio.a if a is None else a
        dx, dy, H, p, w, D, a = np.broadcast_arrays(
            *(np.asarray(v, dtype=float) for v in (dx, dy, H, p, w, D, a))
        )
        d2 = dx * dx + dy * dy + H * H
        d = np.sqrt(d2)
        m = radio.gain_over_noise * p / w * np.exp(-a * d) / d2
        e = 1.0 + m
        log_e = np.log1p(m)
        A = a * d + 2.0
        C = D * p * LN2 / w

        B = C / log_e
        dB_de = -C / (e * log_e**2)
        d2B_de2 = C * (log_e + 2.0) / (e * e * log_e**3)
        de_dd = -m * A / d
        d2e_dd2 = m * (A * A + 2.0) / d2

        first = dB_de * de_dd
        second = d2B_de2 * de_dd**2 + dB_de * d2e_dd2
        cos_x = dx / d
        d2B_dx2 = second * cos_x**2 + first * (d2 - dx * dx) / d**3

        z = dx * dx
        I1 = I1_function(e, A)
        I = I1 * z + A * d2 * e * log_e
        d2B_dx2_closed = I * C * m / (e * e * d2 * d2 * log_e**3)

        I1_min = I1_function(e, 2.0)
        intercept = A * d2 * e * log_e
        with np.errstate(divide="ignore"):
            z_star = np.where(I1 < 0, intercept / np.where(I1 < 0, -I1, 1.0), np.inf)
            z_star_min = np.where(I1_min < 0, intercept / np.where(I1_min < 0, -I1_min, 1.0), np.inf)
        z_max = radio.gain_over_noise * p / (m * w)

        g_of_e = g_function(e)
        S = (2.0 * e - log_e - 2.0) * A * A - 2.0 * e * log_e
        L = (d2 - H * H) * S + H * H * e * log_e * A
        L_lower = (d2 - H * H) * 2.0 * g_of_e + H * H * e * log_e * A
        G1 = (C * m) ** 2 * A * L / (e**3 * log_e**5 * d2**3)

        rho = np.stack([dx, dy], axis=-1)
        outer = rho[..., :, None] * rho[..., None, :]
        hessian = (second / d2)[..., None, None] * outer + (first / d)[..., None, None] * (
            np.eye(2) - outer / d2[..., None, None]
        )

        return cls(
            d=d, e=e, A=A, B=B, dB_de=dB_de, d2B_de2=d2B_de2, de_dd=de_dd, d2e_dd2=d2e_dd2,
            d2B_dx2=d2B_dx2, d2B_dx2_closed=d2B_dx2_closed, I=I, I1=I1, I1_min=I1_min,
            z=z, z_max=z_max, z_star=z_star, z_star_min=z_star_min, g_of_e=g_of_e,
            S=S, L=L, L_lower=L_lower, G1=G1, hessian=hessian,
        )


def e_crossing_distance(radio: RadioConstants, p: float, w: float, level: float, bracket=(10.0, 200.0)) -> float:
    """Distance at which e falls to ``level``; NaN when the bracket does not straddle it."""
    lo, hi = bracket

    def excess(d):
        return snr_term(d, radio, p, w) - level

    if excess(lo) * excess(hi) > 0:
        return math.nan
    return float(brentq(excess, lo, hi, xtol=1e-12))
