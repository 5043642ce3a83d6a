"""
Domain types: radio constants, users, scenarios, decisions and derived link quantities.

All values are SI (m, Hz, W, J, bits, s). dB/dBm inputs are converted
once, when a ``RadioConstants`` is built.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from utils.error_handling import ValidationError


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def dbm_to_watts(value_dbm: float) -> float:
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


def _frozen_array(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class RadioConstants:
    """Channel constants.

    ``h0_db`` and ``sigma2_dbm_per_hz`` are the I/O values; ``h0`` (linear)
    and ``sigma2`` (W/Hz, a noise power spectral density) are derived from
    them at construction.
    """

    h0_db: float
    sigma2_dbm_per_hz: float
    a: float
    f: float
    h0: float = field(init=False)
    sigma2: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "h0", db_to_linear(self.h0_db))
        object.__setattr__(self, "sigma2", dbm_to_watts(self.sigma2_dbm_per_hz))
        if not (math.isfinite(self.h0) and self.h0 > 0):
            raise ValidationError("h0 must be positive", details=f"h0_db={self.h0_db}")
        if not (math.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ValidationError(
                "sigma2 must be positive", details=f"sigma2_dbm_per_hz={self.sigma2_dbm_per_hz}"
            )
        if not self.a >= 0:
            raise ValidationError("Absorption coefficient a must be nonnegative", details=f"a={self.a}")
        if not self.f > 0:
            raise ValidationError("Frequency f must be positive", details=f"f={self.f}")

    @classmethod
    def from_linear(cls, h0: float, sigma2: float, a: float, f: float = 1.2e12) -> "RadioConstants":
        """Build from linear h0 and sigma2 in W/Hz."""
        if h0 <= 0 or sigma2 <= 0:
            raise ValidationError("h0 and sigma2 must be positive", details=f"h0={h0}, sigma2={sigma2}")
        return cls(
            h0_db=10.0 * math.log10(h0),
            sigma2_dbm_per_hz=10.0 * math.log10(sigma2) + 30.0,
            a=a,
            f=f,
        )

    @property
    def gain_over_noise(self) -> float:
        """h0 / sigma2 in Hz/W."""
        return self.h0 / self.sigma2


@dataclass(frozen=True)
class UserSpec:
    """One ground user: position, payloads and budgets."""

    x: float
    y: float
    D: float
    E: float
    Q: float
    P: float

    def __post_init__(self):
        for name in ("D", "E", "Q", "P"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"User {name} must be positive", details=f"{name}={value}")

    @property
    def position(self) -> Tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Scenario:
    """A full problem instance."""

    users: Tuple[UserSpec, ...]
    radio: RadioConstants
    H: float
    q: float
    B_W: float
    area_side: float
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))
        if len(self.users) < 1:
            raise ValidationError("A scenario needs at least one user")
        for name in ("H", "q", "B_W", "area_side"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"Scenario {name} must be positive", details=f"{name}={value}")
        for n, user in enumerate(self.users):
            if not (0.0 <= user.x <= self.area_side and 0.0 <= user.y <= self.area_side):
                raise ValidationError(
                    "User lies outside the service area",
                    details=f"user {n} at ({user.x}, {user.y}), area_side={self.area_side}",
                )

    @property
    def N(self) -> int:
        return len(self.users)

    @cached_property
    def positions(self) -> np.ndarray:
        """(N, 2) user coordinates."""
        return _frozen_array([[u.x, u.y] for u in self.users]).reshape(self.N, 2)

    @cached_property
    def D(self) -> np.ndarray:
        return _frozen_array([u.D for u in self.users])

    @cached_property
    def E(self) -> np.ndarray:
        return _frozen_array([u.E for u in self.users])

    @cached_property
    def Q(self) -> np.ndarray:
        return _frozen_array([u.Q for u in self.users])

    @cached_property
    def P(self) -> np.ndarray:
        return _frozen_array([u.P for u in self.users])

    @property
    def centroid(self) -> Tuple[float, float]:
        cx, cy = self.positions.mean(axis=0)
        return float(cx), float(cy)


@dataclass(frozen=True)
class Decision:
    """One candidate solution: UAV position plus per-user power and bandwidth."""

    x: float
    y: float
    p: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        p = _frozen_array(self.p).reshape(-1)
        w = _frozen_array(self.w).reshape(-1)
        if p.shape != w.shape:
            raise ValidationError(
                "Power and bandwidth vectors differ in length",
                details=f"len(p)={p.size}, len(w)={w.size}",
            )
        if not np.all(p > 0):
            raise ValidationError("All transmit powers must be positive", details=f"p={p.tolist()}")
        if not np.all(w > 0):
            raise ValidationError("All bandwidths must be positive", details=f"w={w.tolist()}")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "w", w)

    @property
    def N(self) -> int:
        return int(self.p.size)

    def replace(self, **changes) -> "Decision":
        values = {"x": self.x, "y": self.y, "p": self.p, "w": self.w}
        values.update(changes)
        return Decision(**values)

    def same_as(self, other: "Decision") -> bool:
        """Bit-for-bit equality."""
        return (
            self.x == other.x
            and self.y == other.y
            and np.array_equal(self.p, other.p)
            and np.array_equal(self.w, other.w)
        )

    def to_dict(self) -> dict:
        return {
            "x_m": self.x,
            "y_m": self.y,
            "p_watts": self.p.tolist(),
            "w_hz": self.w.tolist(),
        }


@dataclass(frozen=True)
class LinkDerived:
    """Per-user derived quantities for one (scenario, decision) pair."""

    d: np.ndarray
    gain: np.ndarray
    k: np.ndarray
    l: np.ndarray
    e: np.ndarray
    r_up: np.ndarray
    r_dn: np.ndarray
    t_up: np.ndarray
    t_dn: np.ndarray
    A: np.ndarray


@dataclass(frozen=True)
class ConstraintReport:
    """Residuals of the bandwidth, power and energy constraints."""

    bandwidth_residual: float
    power_violations: np.ndarray
    energy_violations: np.ndarray
    feasible: bool

    def to_dict(self) -> dict:
        return {
            "bandwidth_residual": self.bandwidth_residual,
            "power_violations_w": self.power_violations.tolist(),
            "energy_violations_j": self.energy_violations.tolist(),
            "feasible": self.feasible,
        }
