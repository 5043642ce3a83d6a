"""
Bandwidth subproblem at fixed power and location.

Each user's delay D / g(w; b_p) + E / g(w; b_q), with
g(w; b) = w log2(1 + b / w) and b = alpha * power, is strictly decreasing
and convex in its own bandwidth. The optimum therefore equalizes the
marginal delay reductions of all users above their energy floor w_min:
a water-filling search on the multiplier lambda of sum(w) = B_W.

All routines work on arrays with arbitrary leading axes, so exhaustive
search can solve thousands of placements at once.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from config import get_config
from model.channel import LN2, distances, snr_per_watt_hz
from model.types import Scenario
from utils.error_handling import DomainError, EnergyInfeasible
from utils.logging_config import log_debug

# incumbent bandwidths within this of the budget are kept as feasible
_INCUMBENT_SLACK = 1e-12


@dataclass(frozen=True)
class BandwidthBounds:
    """Per-user energy floors and the bandwidth left after meeting them."""

    w_min: np.ndarray  # Hz
    slack: float  # Hz
    B_W: float  # Hz

    @property
    def feasible(self) -> bool:
        # floors capped at a feasible incumbent can sum to B_W plus rounding
        return self.slack >= -_bandwidth_tolerance(self.B_W)

    @property
    def saturated(self) -> bool:
        """No bandwidth left for any user above its floor."""
        return self.slack <= _bandwidth_tolerance(self.B_W)


def _bandwidth_tolerance(B: float) -> float:
    """Allowed |sum(w) - B_W| in Hz, the same tolerance the constraint report uses."""
    return get_config("tolerances")["bandwidth_rel"] * B


def _rate(w: np.ndarray, b: np.ndarray) -> np.ndarray:
    return w * np.log1p(b / w) / LN2


def _rate_slope(w: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    ratio = b / w
    log_term = np.log1p(ratio)
    return w * log_term / LN2, (log_term - ratio / (1.0 + ratio)) / LN2


def delay_in_bandwidth(w, b_p, b_q, D, E) -> np.ndarray:
    """Per-user t_up + t_dn as a function of bandwidth."""
    return D / _rate(w, b_p) + E / _rate(w, b_q)


def marginal(w, b_p, b_q, D, E) -> np.ndarray:
    """-d(t_up + t_dn)/dw in s/Hz; positive and decreasing in w."""
    rate_p, slope_p = _rate_slope(w, b_p)
    rate_q, slope_q = _rate_slope(w, b_q)
    return D * slope_p / rate_p**2 + E * slope_q / rate_q**2


def _min_bandwidths(
    b_p: np.ndarray,
    p: np.ndarray,
    D: np.ndarray,
    Q: np.ndarray,
    B: float,
    incumbent: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Smallest w with p D / g(w; b_p) <= Q, by bisection in log w.

    Returns ``(w_min, feasible)``; w_min is the feasible end of the final
    bracket and NaN where even w = B violates the budget.
    """
    cfg = get_config("solver")

    def energy(w):
        return p * D / _rate(w, b_p)

    lo = np.full(b_p.shape, cfg["bandwidth_min_hz"])
    hi = np.full(b_p.shape, float(B))
    feasible = energy(hi) <= Q
    if incumbent is not None:
        incumbent = np.broadcast_to(np.asarray(incumbent, dtype=float), b_p.shape)
        kept = (incumbent > 0) & (incumbent <= B) & (energy(incumbent) <= Q * (1.0 + _INCUMBENT_SLACK))
        hi = np.where(kept, incumbent, hi)
        feasible = feasible | kept

    at_floor = energy(lo) <= Q
    hi = np.where(at_floor, lo, hi)
    rel_tol = cfg["min_bandwidth_rel_tol"]

    for _ in range(cfg["dual_max_iters"]):
        active = feasible & ~at_floor & (hi > lo * (1.0 + rel_tol))
        if not active.any():
            break
        mid = np.sqrt(lo * hi)
        ok = energy(mid) <= Q
        hi = np.where(active & ok, mid, hi)
        lo = np.where(active & ~ok, mid, lo)

    return np.where(feasible, hi, np.nan), feasible


def clipped_equal_split(w_min: np.ndarray, B: float) -> np.ndarray:
    """Equal split raised to each user's floor, the free users sharing the rest.

    Solves sum(max(w_min, c)) = B for the common level c. Rows whose floors
    already use up B get their floors back unchanged.
    """
    w_min = np.asarray(w_min, dtype=float)
    N = w_min.shape[-1]
    v = -np.sort(-w_min, axis=-1)
    prefix = np.concatenate([np.zeros(v.shape[:-1] + (1,)), np.cumsum(v, axis=-1)[..., :-1]], axis=-1)
    levels = (B - prefix) / (N - np.arange(N))
    valid = v <= levels
    first = np.argmax(valid, axis=-1)[..., None]
    level = np.take_along_axis(levels, first, axis=-1)
    saturated = ~np.any(valid, axis=-1, keepdims=True)
    return np.where(saturated, w_min, np.maximum(w_min, level))


def _inverse_marginal(lam, w_min, B, b_p, b_q, D, E, iterations: int) -> np.ndarray:
    """w_n(lambda) = max(w_min_n, root of marginal_n(w) = lambda), capped at B."""
    lo = w_min.copy()
    hi = np.full(w_min.shape, float(B))
    at_floor = marginal(lo, b_p, b_q, D, E) <= lam
    at_cap = marginal(hi, b_p, b_q, D, E) >= lam
    for _ in range(iterations):
        mid = np.sqrt(lo * hi)
        above = marginal(mid, b_p, b_q, D, E) > lam
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    w = np.sqrt(lo * hi)
    w = np.where(at_cap, float(B), w)
    return np.where(at_floor, w_min, w)


def _renormalize(w: np.ndarray, w_min: np.ndarray, B: float) -> np.ndarray:
    free = w > w_min * (1.0 + 1e-12)
    fixed_total = np.sum(np.where(free, 0.0, w), axis=-1, keepdims=True)
    free_total = np.sum(np.where(free, w, 0.0), axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(free_total > 0, (B - fixed_total) / free_total, 1.0)
    return np.maximum(np.where(free, w * scale, w), w_min)


def _dual_allocation(w_min, B, b_p, b_q, D, E) -> np.ndarray:
    cfg = get_config("solver")
    N = w_min.shape[-1]
    tol = cfg["bandwidth_sum_rel_tol"] * B

    lam_hi = np.max(marginal(w_min, b_p, b_q, D, E), axis=-1, keepdims=True)
    lam_lo = np.min(marginal(np.maximum(w_min, B / N), b_p, b_q, D, E), axis=-1, keepdims=True)
    log_lo = np.log(np.minimum(lam_lo, lam_hi))
    log_hi = np.log(lam_hi)

    w = _inverse_marginal(np.exp(log_hi), w_min, B, b_p, b_q, D, E, cfg["inner_bisection_iters"])
    done = np.abs(np.sum(w, axis=-1, keepdims=True) - B) <= tol
    result = np.where(done, w, np.nan)

    for _ in range(cfg["dual_max_iters"]):
        if done.all():
            break
        log_mid = 0.5 * (log_lo + log_hi)
        w = _inverse_marginal(np.exp(log_mid), w_min, B, b_p, b_q, D, E, cfg["inner_bisection_iters"])
        total = np.sum(w, axis=-1, keepdims=True)
        newly = ~done & (np.abs(total - B) <= tol)
        result = np.where(newly, w, result)
        done = done | newly
        # too much bandwidth handed out: raise the multiplier
        log_lo = np.where(total > B, log_mid, log_lo)
        log_hi = np.where(total > B, log_hi, log_mid)

    result = np.where(done, result, w)
    return _renormalize(result, w_min, B)


def _allocate(
    alpha: np.ndarray,
    p: np.ndarray,
    s: Scenario,
    incumbent: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Core solver over leading axes.

    Returns ``(w, objective, w_min, energy_ok)``. Rows that cannot meet
    their budgets get NaN bandwidths and infinite objective.
    """
    B = s.B_W
    b_p = alpha * p
    b_q = alpha * s.q
    D, E, Q = s.D, s.E, s.Q

    w_min, energy_ok = _min_bandwidths(b_p, p, D, Q, B, incumbent)
    tolerance = _bandwidth_tolerance(B)
    rows_ok = energy_ok.all(axis=-1) & (np.nansum(w_min, axis=-1) <= B + tolerance)

    w_out = np.full(alpha.shape, np.nan)
    objective = np.full(alpha.shape[:-1], np.inf)
    if not rows_ok.any():
        return w_out, objective, w_min, energy_ok

    sel = rows_ok
    floor = w_min[sel]
    args = (b_p[sel], b_q[sel], D, E)

    candidates = [_dual_allocation(floor, B, *args), clipped_equal_split(floor, B)]
    if incumbent is not None:
        inc = np.broadcast_to(np.asarray(incumbent, dtype=float), alpha.shape)[sel]
        inc_ok = np.all(inc >= floor, axis=-1) & (np.abs(np.sum(inc, axis=-1) - B) <= tolerance)
        candidates.append(np.where(inc_ok[..., None], inc, candidates[0]))

    # only allocations that spend B_W compete on delay
    best_w = np.full(floor.shape, np.nan)
    best_obj = np.full(floor.shape[:-1], np.inf)
    for candidate in candidates:
        on_budget = np.abs(np.sum(candidate, axis=-1) - B) <= tolerance
        obj = np.where(on_budget, np.sum(delay_in_bandwidth(candidate, *args), axis=-1), np.inf)
        better = obj < best_obj
        best_w = np.where(better[..., None], candidate, best_w)
        best_obj = np.where(better, obj, best_obj)

    w_out[sel] = best_w
    objective[sel] = best_obj
    return w_out, objective, w_min, energy_ok


def _alpha(s: Scenario, x: float, y: float) -> np.ndarray:
    return snr_per_watt_hz(distances(s.positions, x, y, s.H), s.radio)


def min_bandwidth(n: int, s: Scenario, p_n: float, d_n: float) -> float:
    """Smallest bandwidth (Hz) at which user n's uplink energy meets Q_n."""
    if not p_n > 0:
        raise DomainError("Transmit power must be positive", details=f"p={p_n}")
    alpha = snr_per_watt_hz(np.array([d_n]), s.radio)
    w_min, feasible = _min_bandwidths(
        alpha * p_n, np.array([p_n]), s.D[n : n + 1], s.Q[n : n + 1], s.B_W
    )
    if not feasible[0]:
        raise EnergyInfeasible("Energy budget not met even with the whole band", users=[n])
    return float(w_min[0])


def bandwidth_bounds(
    s: Scenario, p: np.ndarray, x: float, y: float, incumbent: Optional[np.ndarray] = None
) -> BandwidthBounds:
    p = np.asarray(p, dtype=float)
    alpha = _alpha(s, x, y)
    w_min, feasible = _min_bandwidths(alpha * p, p, s.D, s.Q, s.B_W, incumbent)
    if not feasible.all():
        raise EnergyInfeasible(
            "Energy budget not met even with the whole band", users=np.flatnonzero(~feasible)
        )
    return BandwidthBounds(w_min=w_min, slack=float(s.B_W - np.sum(w_min)), B_W=float(s.B_W))


def solve_bandwidth(
    s: Scenario,
    p: np.ndarray,
    x: float,
    y: float,
    incumbent: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Optimal bandwidths (Hz) summing to B_W, each above its energy floor.

    The result is never worse than the clipped equal split, nor than a
    feasible ``incumbent``.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (s.N,) or not np.all(p > 0):
        raise DomainError("Transmit powers must be positive, one per user", details=f"p={p}")

    bounds = bandwidth_bounds(s, p, x, y, incumbent)
    if not bounds.feasible:
        crowded = np.flatnonzero(bounds.w_min > s.B_W / s.N)
        raise EnergyInfeasible(
            "Energy floors exceed the total bandwidth",
            users=crowded,
            details=f"sum(w_min)={np.sum(bounds.w_min):.6g} Hz > B_W={s.B_W:.6g} Hz",
        )

    w, objective, _, _ = _allocate(_alpha(s, x, y)[None, :], p[None, :], s, incumbent)
    if not np.isfinite(objective[0]):
        raise EnergyInfeasible(
            "No allocation above the energy floors spends exactly B_W",
            details=f"sum(w_min)={np.sum(bounds.w_min):.6g} Hz, B_W={s.B_W:.6g} Hz",
        )
    log_debug(
        "Bandwidth block solved",
        objective=f"{objective[0]:.9g}",
        slack_hz=f"{bounds.slack:.6g}",
        saturated=bounds.saturated,
    )
    return w[0]


def solve_bandwidth_batch(s: Scenario, alpha: np.ndarray, p: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Bandwidths and total delay for many (alpha, p) rows of shape (..., N).

    Infeasible rows get NaN bandwidths and infinite objective instead of
    raising.
    """
    alpha, p = np.broadcast_arrays(np.asarray(alpha, dtype=float), np.asarray(p, dtype=float))
    # rows without a feasible power are solved with a placeholder, then dropped
    powered = np.all(np.isfinite(p) & (p > 0), axis=-1)
    w, objective, _, _ = _allocate(alpha, np.where(powered[..., None], p, 1.0), s)
    w = np.where(powered[..., None], w, np.nan)
    objective = np.where(powered, objective, np.inf)
    return w, objective
