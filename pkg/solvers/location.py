"""
UAV location subproblem at fixed power and bandwidth.

Minimizes the total delay over (x, y) subject to the uplink energy budgets
with a log barrier. Each budget is a disc around its user: uplink energy
grows with distance, so user n allows the UAV within a radius set by Q_n.

Derivatives come from the chain rule through d_n. For one delay term
B = C / ln(e) with C = payload ln2 / w and e = 1 + kappa e^{-a d} / d^2:

    dB/dd   = C m A / (e ln^2(e) d)
    d2B/dd2 = C m S / (e^2 d^2 ln^3(e))

where m = e - 1, A = a d + 2 and S = (2e - ln e - 2) A^2 - 2 e ln e.
Newton steps are taken while every uplink SNR term e_n stays below the
convexity bound; otherwise the stage falls back to Barzilai-Borwein
gradient steps. Both use Armijo backtracking.
"""

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.optimize import linprog

from config import get_config
from model.channel import LN2, distances
from model.types import Scenario
from utils.error_handling import DomainError, InfeasibleInit, LineSearchStall, ValidationError
from utils.logging_config import log_debug, log_warning

ArrayLike = Union[float, np.ndarray]

_IDENTITY = np.eye(2)
_PHASE_ONE_STEP_M = 1e-3
_PHASE_ONE_HALVINGS = 60
_ROUNDING = 4.0 * np.finfo(float).eps


@dataclass(frozen=True)
class LocationGradient:
    """Gradient (s/m) and Hessian (s/m^2) of the delay in (x, y)."""

    g_x: float
    g_y: float
    hessian: np.ndarray

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.g_x, self.g_y])

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.hessian)[0])


@dataclass(frozen=True)
class LocationResult:
    """Outcome of one location solve."""

    x: float
    y: float
    objective_s: float
    convexity_certificate: bool
    stalled: bool
    newton_steps: int
    gradient_steps: int


@dataclass(frozen=True)
class _Terms:
    value: np.ndarray  # (N,)
    grad: np.ndarray  # (N, 2)
    hess: np.ndarray  # (N, 2, 2)
    e: np.ndarray  # (N,)


def _delay_terms(
    positions: np.ndarray,
    H: float,
    s: Scenario,
    z: np.ndarray,
    power: np.ndarray,
    w: np.ndarray,
    payload: np.ndarray,
    with_hessian: bool = True,
) -> _Terms:
    rho = z - positions
    d2 = np.sum(rho * rho, axis=1) + H * H
    d = np.sqrt(d2)
    a = s.radio.a

    m = s.radio.gain_over_noise * power / w * np.exp(-a * d) / d2
    e = 1.0 + m
    L = np.log1p(m)
    C = payload * LN2 / w
    A = a * d + 2.0

    value = C / L
    first = C * m * A / (e * L * L * d)
    grad = (first / d)[:, None] * rho

    if not with_hessian:
        return _Terms(value=value, grad=grad, hess=np.zeros((len(d), 2, 2)), e=e)

    S = (2.0 * e - L - 2.0) * A * A - 2.0 * e * L
    second = C * m * S / (e * e * d2 * L**3)
    outer = rho[:, :, None] * rho[:, None, :] / d2[:, None, None]
    hess = second[:, None, None] * outer + (first / d)[:, None, None] * (_IDENTITY - outer)
    return _Terms(value=value, grad=grad, hess=hess, e=e)


def delay_term_derivatives(
    s: Scenario, n: int, x: float, y: float, power: float, w: float, payload: float
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Value (s), gradient (s/m) and Hessian (s/m^2) of payload / (w log2(1 + k p)) in (x, y).

    Serves the uplink term (payload D_n, power p_n) and the downlink term
    (payload E_n, power q) alike.
    """
    if not 0 <= n < s.N:
        raise ValidationError("User index out of range", details=f"n={n}, N={s.N}")
    if not (power > 0 and w > 0 and payload > 0):
        raise DomainError(
            "Delay term needs positive power, bandwidth and payload",
            details=f"power={power}, w={w}, payload={payload}",
        )
    terms = _delay_terms(
        s.positions[n : n + 1],
        s.H,
        s,
        np.array([x, y], dtype=float),
        np.array([power], dtype=float),
        np.array([w], dtype=float),
        np.array([payload], dtype=float),
    )
    return float(terms.value[0]), terms.grad[0], terms.hess[0]


def location_objective(s: Scenario, p: np.ndarray, w: np.ndarray, x: ArrayLike, y: ArrayLike) -> ArrayLike:
    """Total delay at UAV placements (x, y) of any shape, p and w fixed."""
    p = np.asarray(p, dtype=float)
    w = np.asarray(w, dtype=float)
    d = distances(s.positions, x, y, s.H)
    decay = s.radio.gain_over_noise * np.exp(-s.radio.a * d) / (d * d) / w
    total = np.sum(s.D * LN2 / (w * np.log1p(decay * p)) + s.E * LN2 / (w * np.log1p(decay * s.q)), axis=-1)
    return float(total) if np.ndim(total) == 0 else total


def location_derivatives(
    s: Scenario, p: np.ndarray, w: np.ndarray, x: float, y: float
) -> Tuple[float, LocationGradient]:
    """Total delay and its analytic gradient/Hessian in (x, y).

    Per-user terms are summed in user-index order.
    """
    z = np.array([x, y], dtype=float)
    p = np.asarray(p, dtype=float)
    w = np.asarray(w, dtype=float)
    q = np.full(s.N, s.q)
    up = _delay_terms(s.positions, s.H, s, z, p, w, s.D)
    dn = _delay_terms(s.positions, s.H, s, z, q, w, s.E)
    grad = up.grad.sum(axis=0) + dn.grad.sum(axis=0)
    hess = up.hess.sum(axis=0) + dn.hess.sum(axis=0)
    hess = 0.5 * (hess + hess.T)
    value = float(np.sum(up.value) + np.sum(dn.value))
    return value, LocationGradient(g_x=float(grad[0]), g_y=float(grad[1]), hessian=hess)


@dataclass(frozen=True)
class _Evaluation:
    objective: float
    barrier: float
    grad: np.ndarray
    hess: np.ndarray
    slack: np.ndarray
    e_up: np.ndarray


class _LocationProblem:
    """Barrier objective f(z) - mu * sum(log(Q_n - p_n t_up_n(z)))."""

    def __init__(self, s: Scenario, p: np.ndarray, w: np.ndarray):
        self.s = s
        self.p = p
        self.w = w
        self.q = np.full(s.N, s.q)

    def _terms(self, z: np.ndarray, with_hessian: bool) -> Tuple[_Terms, _Terms]:
        up = _delay_terms(self.s.positions, self.s.H, self.s, z, self.p, self.w, self.s.D, with_hessian)
        dn = _delay_terms(self.s.positions, self.s.H, self.s, z, self.q, self.w, self.s.E, with_hessian)
        return up, dn

    def objective_and_slack(self, z: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
        up, dn = self._terms(z, with_hessian=False)
        objective = float(np.sum(up.value) + np.sum(dn.value))
        return objective, self.s.Q - self.p * up.value, up.e

    def energy_gradients(self, z: np.ndarray) -> np.ndarray:
        up, _ = self._terms(z, with_hessian=False)
        return self.p[:, None] * up.grad

    def barrier_value(self, z: np.ndarray, mu: float) -> float:
        objective, slack, _ = self.objective_and_slack(z)
        if np.any(slack <= 0):
            return float("inf")
        return objective - mu * float(np.sum(np.log(slack)))

    def evaluate(self, z: np.ndarray, mu: float) -> _Evaluation:
        up, dn = self._terms(z, with_hessian=True)
        slack = self.s.Q - self.p * up.value
        objective = float(np.sum(up.value) + np.sum(dn.value))

        energy_grad = self.p[:, None] * up.grad
        energy_hess = self.p[:, None, None] * up.hess
        inv = 1.0 / slack
        grad = up.grad.sum(axis=0) + dn.grad.sum(axis=0) + mu * (inv[:, None] * energy_grad).sum(axis=0)
        hess = (
            up.hess.sum(axis=0)
            + dn.hess.sum(axis=0)
            + mu * (inv[:, None, None] * energy_hess).sum(axis=0)
            + mu * np.einsum("n,ni,nj->ij", inv * inv, energy_grad, energy_grad)
        )
        return _Evaluation(
            objective=objective,
            barrier=objective - mu * float(np.sum(np.log(slack))),
            grad=grad,
            hess=0.5 * (hess + hess.T),
            slack=slack,
            e_up=up.e,
        )


class _Progress:
    """Best feasible iterate and step counters."""

    def __init__(self, z: np.ndarray, objective: float, certificate: bool):
        self.best_z = z.copy()
        self.best_objective = objective
        self.certificate = certificate
        self.newton_steps = 0
        self.gradient_steps = 0

    def offer(self, z: np.ndarray, objective: float) -> None:
        if objective < self.best_objective:
            self.best_z = z.copy()
            self.best_objective = objective


def _phase_one(problem: _LocationProblem, z0: np.ndarray, tight: np.ndarray) -> Optional[np.ndarray]:
    """Step off the boundary of the tight budgets into the strict interior.

    Finds a unit-box direction v maximizing min_n u_n . v over the tight
    users, u_n pointing towards user n. Returns None when no direction
    lowers every tight user's energy (the point is pinned).
    """
    grads = problem.energy_gradients(z0)[tight]
    norms = np.linalg.norm(grads, axis=1)
    if np.any(norms == 0):
        return None
    u = -grads / norms[:, None]

    result = linprog(
        c=[0.0, 0.0, -1.0],
        A_ub=np.column_stack([-u, np.ones(len(u))]),
        b_ub=np.zeros(len(u)),
        bounds=[(-1.0, 1.0), (-1.0, 1.0), (None, None)],
        method="highs",
    )
    if result.status != 0 or -result.fun <= 1e-12:
        return None

    v = result.x[:2]
    step = _PHASE_ONE_STEP_M
    for _ in range(_PHASE_ONE_HALVINGS):
        candidate = z0 + step * v
        _, slack, _ = problem.objective_and_slack(candidate)
        if np.all(slack > 0):
            return candidate
        step *= 0.5
    return None


def _armijo(
    problem: _LocationProblem,
    z: np.ndarray,
    mu: float,
    current: _Evaluation,
    direction: np.ndarray,
    t: float,
    cfg: dict,
) -> float:
    slope = float(current.grad @ direction)
    # decreases below rounding of the barrier value count as no increase
    noise = _ROUNDING * max(1.0, abs(current.barrier))
    while True:
        step_length = t * float(np.linalg.norm(direction))
        if step_length < cfg["min_step"]:
            raise LineSearchStall(
                "No descent step above the minimum step length",
                details=f"mu={mu:.1e}, |grad|={np.linalg.norm(current.grad):.3e}",
            )
        value = problem.barrier_value(z + t * direction, mu)
        if value <= current.barrier + cfg["armijo_c"] * t * slope + noise:
            return t
        t *= cfg["armijo_beta"]


def _newton_direction(current: _Evaluation) -> Optional[np.ndarray]:
    try:
        factor = cho_factor(current.hess)
    except LinAlgError:
        return None
    direction = -cho_solve(factor, current.grad)
    if not np.all(np.isfinite(direction)) or direction @ current.grad >= 0:
        return None
    return direction


def _centering(
    problem: _LocationProblem, z: np.ndarray, mu: float, cfg: dict, progress: _Progress
) -> np.ndarray:
    bound = cfg["convexity_e_bound"]
    previous_z = previous_grad = None

    for _ in range(cfg["newton_max_iters"]):
        current = problem.evaluate(z, mu)
        progress.offer(z, current.objective)

        grad_norm = float(np.linalg.norm(current.grad))
        if grad_norm <= cfg["gradient_tol"]:
            break

        certified = bool(np.all(current.e_up < bound))
        if not certified:
            progress.certificate = False
        direction = _newton_direction(current) if certified else None

        if direction is not None:
            # Newton decrement at rounding level
            if -(direction @ current.grad) <= _ROUNDING * max(1.0, abs(current.barrier)):
                break
            t = _armijo(problem, z, mu, current, direction, 1.0, cfg)
            progress.newton_steps += 1
        else:
            direction = -current.grad
            t0 = 1.0 / grad_norm
            if previous_z is not None:
                s_step = z - previous_z
                y_step = current.grad - previous_grad
                curvature = float(s_step @ y_step)
                if curvature > 0:
                    t0 = float(s_step @ s_step) / curvature
            t = _armijo(problem, z, mu, current, direction, t0, cfg)
            progress.gradient_steps += 1

        previous_z, previous_grad = z, current.grad
        step = t * direction
        z = z + step
        if np.linalg.norm(step) <= 1e-12 * (1.0 + np.linalg.norm(z)):
            break

    objective, slack, _ = problem.objective_and_slack(z)
    if np.all(slack > 0):
        progress.offer(z, objective)
    return z


def solve_location(
    s: Scenario, p: np.ndarray, w: np.ndarray, init: Tuple[float, float]
) -> LocationResult:
    """Minimize the total delay over (x, y) at fixed p and w, keeping every energy budget.

    The result is the best feasible iterate seen, so its objective never
    exceeds the objective at ``init``.
    """
    cfg = get_config("solver")
    p = np.asarray(p, dtype=float)
    w = np.asarray(w, dtype=float)
    if p.shape != (s.N,) or w.shape != (s.N,):
        raise ValidationError("Power and bandwidth need one entry per user", details=f"N={s.N}")
    if np.any(p > s.P * (1.0 + 1e-12)):
        raise ValidationError("Transmit power above the limit P", details=f"users: {np.flatnonzero(p > s.P).tolist()}")

    problem = _LocationProblem(s, p, w)
    z0 = np.array(init, dtype=float)
    objective0, slack0, e0 = problem.objective_and_slack(z0)
    tolerance_j = get_config("tolerances")["energy_j"]
    if np.any(slack0 < -tolerance_j):
        users = np.flatnonzero(slack0 < -tolerance_j)
        raise InfeasibleInit(
            "Location start violates energy budgets",
            details=f"users: {users.tolist()}, excess J: {(-slack0[users]).tolist()}",
        )

    progress = _Progress(z0, objective0, certificate=bool(np.all(e0 < cfg["convexity_e_bound"])))

    tight = slack0 <= cfg["tight_energy_rel"] * s.Q
    start = z0
    if tight.any():
        start = _phase_one(problem, z0, tight)
        if start is None:
            log_debug("Location pinned by tight energy budgets", tight_users=np.flatnonzero(tight).tolist())
            return _result(progress, stalled=False)

    stalled = False
    mu = cfg["barrier_mu_start"]
    z = start
    try:
        while mu >= cfg["barrier_mu_end"] * (1.0 - 1e-9):
            z = _centering(problem, z, mu, cfg, progress)
            mu /= cfg["barrier_mu_factor"]
    except LineSearchStall as e:
        stalled = True
        log_warning(f"Location line search stalled: {e.message}", details=e.details)

    log_debug(
        "Location block solved",
        objective=f"{progress.best_objective:.9g}",
        newton_steps=progress.newton_steps,
        gradient_steps=progress.gradient_steps,
        certificate=progress.certificate,
    )
    return _result(progress, stalled)


def _result(progress: _Progress, stalled: bool) -> LocationResult:
    return LocationResult(
        x=float(progress.best_z[0]),
        y=float(progress.best_z[1]),
        objective_s=progress.best_objective,
        convexity_certificate=progress.certificate,
        stalled=stalled,
        newton_steps=progress.newton_steps,
        gradient_steps=progress.gradient_steps,
    )
