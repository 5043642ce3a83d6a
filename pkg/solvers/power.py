"""
Transmit power subproblem: closed-form optimal power per user.

At fixed location and bandwidth the problem separates across users. The
uplink delay falls as power rises, so each user transmits at the largest
power allowed by its energy budget and the cap P:

    log2(1 + k p) / p >= l,   l = D / (w Q)

With u = k p and c = l ln2 / k the budget reads ln(1 + u) >= c u, whose
positive root is u* = -W-1(-c e^{-c}) / c - 1. The principal branch gives
the trivial root u = 0. No positive power meets the budget when c >= 1.
"""

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from config import get_config
from model.channel import LN2, distances, snr_per_watt_hz
from model.types import Scenario
from solvers.special_functions import Branch, lambert_w
from utils.error_handling import DomainError, EnergyInfeasible
from utils.logging_config import log_debug

ArrayLike = Union[float, np.ndarray]

_POLISH_STEPS = 3


@dataclass(frozen=True)
class PowerSubproblemInput:
    """Per-user data of the power subproblem."""

    k: np.ndarray  # 1/W
    l: np.ndarray  # bits / (Hz J)
    P: np.ndarray  # W

    def __post_init__(self):
        k, l, P = np.broadcast_arrays(
            np.asarray(self.k, dtype=float),
            np.asarray(self.l, dtype=float),
            np.asarray(self.P, dtype=float),
        )
        for name, value in (("k", k), ("l", l), ("P", P)):
            if not np.all(np.isfinite(value) & (value > 0)):
                raise DomainError(f"Power subproblem input {name} must be positive", details=f"{name}={value}")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "P", P)

    @property
    def c(self) -> np.ndarray:
        return energy_ratio(self.k, self.l)

    @classmethod
    def from_state(cls, s: Scenario, x: float, y: float, w: np.ndarray) -> "PowerSubproblemInput":
        w = np.asarray(w, dtype=float)
        d = distances(s.positions, x, y, s.H)
        alpha = snr_per_watt_hz(d, s.radio)
        return cls(k=alpha / w, l=s.D / (w * s.Q), P=s.P)


def energy_ratio(k: ArrayLike, l: ArrayLike) -> ArrayLike:
    """c = l ln2 / k; the budget admits a positive power iff c < 1.

    c does not depend on the bandwidth: it equals
    D ln2 sigma2 d^2 e^{a d} / (h0 Q).
    """
    c = np.asarray(l, dtype=float) * LN2 / np.asarray(k, dtype=float)
    return float(c) if np.ndim(c) == 0 else c


def _polish(u: np.ndarray, c: np.ndarray) -> np.ndarray:
    # Newton on ln(1+u) - c u; the root sits on the decreasing side.
    u = np.where(u > 0, u, 2.0 * (1.0 - c))
    for _ in range(_POLISH_STEPS):
        slope = 1.0 / (1.0 + u) - c
        step = np.where(slope < 0, (np.log1p(u) - c * u) / np.where(slope < 0, slope, -1.0), 0.0)
        candidate = u - step
        u = np.where((candidate > 0) & np.isfinite(candidate), candidate, u)
    return u


def closed_form_power(k: ArrayLike, l: ArrayLike, P: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """Elementwise optimal power min(p*, P) for any broadcastable shapes.

    Returns ``(p, feasible)``; entries with c >= 1 - margin get NaN power
    and ``feasible`` False.
    """
    k, l, P = np.broadcast_arrays(
        np.asarray(k, dtype=float), np.asarray(l, dtype=float), np.asarray(P, dtype=float)
    )
    margin = get_config("solver")["energy_ratio_margin"]
    c = l * LN2 / k
    feasible = c < 1.0 - margin

    p = np.full(k.shape, np.nan)
    if feasible.any():
        cf = c[feasible]
        w = lambert_w(Branch.NEGATIVE, -cf * np.exp(-cf))
        u = _polish(-w / cf - 1.0, cf)
        p[feasible] = np.minimum(u / k[feasible], P[feasible])
    return p, feasible


def solve_power_single(k: float, l: float, P: float) -> float:
    """Optimal power (W) of one user."""
    problem = PowerSubproblemInput(k=k, l=l, P=P)
    p, feasible = closed_form_power(problem.k, problem.l, problem.P)
    if not bool(feasible):
        raise EnergyInfeasible(
            "No positive power meets the energy budget",
            details=f"c={float(problem.c):.6g} (needs c < 1)",
        )
    return float(p)


def power_from_principal_branch(k: float, l: float) -> float:
    """Closed form with W0 in place of W-1: always the trivial root p = 0."""
    c = energy_ratio(k, l)
    if not 0 < c < 1:
        raise DomainError("Energy ratio must lie in (0, 1)", details=f"c={c}")
    w0 = lambert_w(Branch.PRINCIPAL, -c * math.exp(-c))
    return max(0.0, (-w0 / c - 1.0) / k)


def solve_power_all(s: Scenario, x: float, y: float, w: np.ndarray) -> np.ndarray:
    """Optimal power of every user at UAV position (x, y) and bandwidths w."""
    w = np.asarray(w, dtype=float)
    if w.shape != (s.N,) or not np.all(w > 0):
        raise DomainError("Bandwidths must be positive, one per user", details=f"w={w}")
    problem = PowerSubproblemInput.from_state(s, x, y, w)
    p, feasible = closed_form_power(problem.k, problem.l, problem.P)
    if not feasible.all():
        users = np.flatnonzero(~feasible)
        raise EnergyInfeasible(
            "Energy budget admits no positive power",
            users=users,
            details=f"users: {users.tolist()}, c={np.round(problem.c[users], 6).tolist()}",
        )
    capped = int(np.sum(p >= s.P))
    log_debug("Power block solved", capped_users=capped, energy_tight_users=s.N - capped)
    return p
