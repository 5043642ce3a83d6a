"""
Joint objective (total uplink + downlink delay) and constraint residuals.
"""

import numpy as np

from config import get_config
from model.channel import LN2, distances, snr_per_watt_hz
from model.types import ConstraintReport, Decision, LinkDerived, Scenario
from utils.error_handling import ValidationError


def _check_dimensions(s: Scenario, dec: Decision) -> None:
    if dec.N != s.N:
        raise ValidationError(
            "Decision vectors do not match the number of users",
            details=f"N={s.N}, len(p)={dec.p.size}, len(w)={dec.w.size}",
        )


def _delay(payload: np.ndarray, rate: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(rate > 0, payload / np.where(rate > 0, rate, 1.0), np.inf)


def derive_links(s: Scenario, dec: Decision) -> LinkDerived:
    """Per-user distances, gains, SNR coefficients, rates and delays."""
    _check_dimensions(s, dec)
    d = distances(s.positions, dec.x, dec.y, s.H)
    alpha = snr_per_watt_hz(d, s.radio)
    k = alpha / dec.w
    r_up = dec.w * np.log1p(k * dec.p) / LN2
    r_dn = dec.w * np.log1p(k * s.q) / LN2
    t_dn = _delay(s.E, r_dn)
    return LinkDerived(
        d=d,
        gain=np.exp(-s.radio.a * d) / (d * d),
        k=k,
        l=s.D / (dec.w * s.Q),
        e=1.0 + k * dec.p,
        r_up=r_up,
        r_dn=r_dn,
        t_up=_delay(s.D, r_up),
        t_dn=t_dn,
        A=t_dn,
    )


def per_user_delay(s: Scenario, dec: Decision) -> np.ndarray:
    links = derive_links(s, dec)
    return links.t_up + links.t_dn


def total_objective(s: Scenario, dec: Decision) -> float:
    """Sum over users of uplink plus downlink delay, in seconds (+inf if any rate is 0)."""
    delays = per_user_delay(s, dec)
    if not np.all(np.isfinite(delays)):
        return float("inf")
    return float(np.sum(delays))


def uplink_energy(s: Scenario, dec: Decision) -> np.ndarray:
    """t_up * p per user, in Joules."""
    return derive_links(s, dec).t_up * dec.p


def constraint_report(s: Scenario, dec: Decision) -> ConstraintReport:
    """Residuals of sum(w) = B_W, p <= P and t_up p <= Q."""
    _check_dimensions(s, dec)
    tolerances = get_config("tolerances")

    bandwidth_residual = abs(float(np.sum(dec.w)) - s.B_W) / s.B_W
    power_violations = np.maximum(0.0, dec.p - s.P)
    energy_violations = np.maximum(0.0, uplink_energy(s, dec) - s.Q)

    feasible = bool(
        bandwidth_residual <= tolerances["bandwidth_rel"]
        and np.all(power_violations <= tolerances["power_w"])
        and np.all(energy_violations <= tolerances["energy_j"])
    )
    return ConstraintReport(
        bandwidth_residual=bandwidth_residual,
        power_violations=power_violations,
        energy_violations=energy_violations,
        feasible=feasible,
    )
