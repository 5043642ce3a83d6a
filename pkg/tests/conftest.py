"""
Shared fixtures: reference scenarios, small hand-built scenarios and an
independent evaluator of the joint objective.
"""

import math

import numpy as np
import pytest

from model.scenario import generate_scenario
from model.types import RadioConstants, Scenario, UserSpec


@pytest.fixture
def table_radio() -> RadioConstants:
    return RadioConstants(h0_db=-40.0, sigma2_dbm_per_hz=-174.0, a=0.005, f=1.2e12)


@pytest.fixture
def reference_scenario() -> Scenario:
    """Reference defaults, 14 users, seed 1."""
    return generate_scenario(1, 14)


@pytest.fixture
def small_scenario() -> Scenario:
    return generate_scenario(7, 5)


def build_scenario(positions, radio=None, D=10e12, E=8e12, Q=8.0, P=0.1, H=20.0, q=2.0, B_W=100e9, area=50.0):
    """Scenario from explicit positions; scalar payloads and budgets are shared by all users."""
    radio = radio or RadioConstants(h0_db=-40.0, sigma2_dbm_per_hz=-174.0, a=0.005, f=1.2e12)
    N = len(positions)
    D, E, Q = (np.broadcast_to(np.asarray(v, dtype=float), (N,)) for v in (D, E, Q))
    users = tuple(
        UserSpec(x=float(x), y=float(y), D=float(D[n]), E=float(E[n]), Q=float(Q[n]), P=P)
        for n, (x, y) in enumerate(positions)
    )
    return Scenario(users=users, radio=radio, H=H, q=q, B_W=B_W, area_side=area)


def reference_objective(s: Scenario, x: float, y: float, p, w) -> float:
    """Sum of D/r_up + E/r_dn written out from the model equations, user by user."""
    total = 0.0
    for n, user in enumerate(s.users):
        d = math.sqrt((x - user.x) ** 2 + (y - user.y) ** 2 + s.H**2)
        k = s.radio.h0 / (w[n] * d * d * math.exp(s.radio.a * d) * s.radio.sigma2)
        r_up = w[n] * math.log2(1.0 + k * p[n])
        r_dn = w[n] * math.log2(1.0 + k * s.q)
        total += user.D / r_up + user.E / r_dn
    return total


def reference_energy(s: Scenario, x: float, y: float, p, w) -> np.ndarray:
    energy = []
    for n, user in enumerate(s.users):
        d = math.sqrt((x - user.x) ** 2 + (y - user.y) ** 2 + s.H**2)
        k = s.radio.h0 / (w[n] * d * d * math.exp(s.radio.a * d) * s.radio.sigma2)
        energy.append(p[n] * user.D / (w[n] * math.log2(1.0 + k * p[n])))
    return np.array(energy)
