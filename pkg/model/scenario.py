"""
Scenario generation and JSON serialization.

Payload lists shorter than N are cycled over the users, so with the
default four-entry lists user n gets entry n mod 4.
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from config import get_config
from model.types import RadioConstants, Scenario, UserSpec
from utils.error_handling import ScenarioFormatError, ValidationError

TBITS = 1e12

OVERRIDE_KEYS = (
    "h0_db",
    "sigma2_dbm_per_hz",
    "a_per_m",
    "f_hz",
    "uplink_tbits",
    "downlink_tbits",
    "q_watts",
    "B_W_hz",
    "Q_joules",
    "P_watts",
    "H_m",
    "area_side_m",
)

USER_KEYS = ("x_m", "y_m", "D_bits", "E_bits", "Q_joules")
RADIO_KEYS = ("h0_db", "sigma2_dbm_per_hz", "a_per_m", "f_hz")
SCENARIO_KEYS = ("users", "radio", "H_m", "q_watts", "P_watts", "B_W_hz", "area_side_m", "seed")


def default_parameters() -> Dict[str, Any]:
    """Reference generation parameters in I/O units."""
    params = {key: value for key, value in get_config("reference").items() if key != "num_users"}
    params["uplink_tbits"] = list(params["uplink_tbits"])
    params["downlink_tbits"] = list(params["downlink_tbits"])
    return params


def _merge_overrides(overrides: Optional[Mapping[str, Any]]) -> Dict[str, Any]:
    params = default_parameters()
    if overrides:
        unknown = sorted(set(overrides) - set(OVERRIDE_KEYS))
        if unknown:
            raise ValidationError("Unknown scenario override", details=f"keys: {unknown}")
        params.update(overrides)
    if not params["uplink_tbits"] or not params["downlink_tbits"]:
        raise ValidationError("Payload lists must not be empty")
    return params


def generate_scenario(
    seed: int, N: int, overrides: Optional[Mapping[str, Any]] = None
) -> Scenario:
    """Users i.i.d. uniform on the square area; payloads cycled from the reference lists."""
    if int(N) < 1:
        raise ValidationError("A scenario needs at least one user", details=f"N={N}")
    if int(seed) < 0:
        raise ValidationError("Seed must be nonnegative", details=f"seed={seed}")
    N = int(N)
    params = _merge_overrides(overrides)

    area = float(params["area_side_m"])
    rng = np.random.default_rng(int(seed))
    positions = rng.uniform(0.0, area, size=(N, 2))

    uplink = params["uplink_tbits"]
    downlink = params["downlink_tbits"]
    users = tuple(
        UserSpec(
            x=float(positions[n, 0]),
            y=float(positions[n, 1]),
            D=float(uplink[n % len(uplink)]) * TBITS,
            E=float(downlink[n % len(downlink)]) * TBITS,
            Q=float(params["Q_joules"]),
            P=float(params["P_watts"]),
        )
        for n in range(N)
    )
    radio = RadioConstants(
        h0_db=float(params["h0_db"]),
        sigma2_dbm_per_hz=float(params["sigma2_dbm_per_hz"]),
        a=float(params["a_per_m"]),
        f=float(params["f_hz"]),
    )
    return Scenario(
        users=users,
        radio=radio,
        H=float(params["H_m"]),
        q=float(params["q_watts"]),
        B_W=float(params["B_W_hz"]),
        area_side=area,
        seed=int(seed),
    )


def _shortest_cycle(values: Sequence[float]) -> List[float]:
    for period in range(1, len(values) + 1):
        if all(values[n] == values[n % period] for n in range(len(values))):
            return list(values[:period])
    return list(values)


def scenario_overrides(s: Scenario) -> Dict[str, Any]:
    """Generation overrides that reproduce ``s``'s constants for a new seed or N."""
    if len(set(s.Q.tolist())) > 1 or len(set(s.P.tolist())) > 1:
        raise ValidationError("Sweeps need a common energy budget and power limit across users")
    return {
        "h0_db": s.radio.h0_db,
        "sigma2_dbm_per_hz": s.radio.sigma2_dbm_per_hz,
        "a_per_m": s.radio.a,
        "f_hz": s.radio.f,
        "uplink_tbits": [v / TBITS for v in _shortest_cycle(s.D.tolist())],
        "downlink_tbits": [v / TBITS for v in _shortest_cycle(s.E.tolist())],
        "q_watts": s.q,
        "B_W_hz": s.B_W,
        "Q_joules": float(s.Q[0]),
        "P_watts": float(s.P[0]),
        "H_m": s.H,
        "area_side_m": s.area_side,
    }


def scenario_to_dict(s: Scenario) -> Dict[str, Any]:
    if len(set(s.P.tolist())) > 1:
        raise ValidationError("Scenario JSON carries a single power limit P for all users")
    return {
        "users": [
            {"x_m": u.x, "y_m": u.y, "D_bits": u.D, "E_bits": u.E, "Q_joules": u.Q}
            for u in s.users
        ],
        "radio": {
            "h0_db": s.radio.h0_db,
            "sigma2_dbm_per_hz": s.radio.sigma2_dbm_per_hz,
            "a_per_m": s.radio.a,
            "f_hz": s.radio.f,
        },
        "H_m": s.H,
        "q_watts": s.q,
        "P_watts": s.users[0].P,
        "B_W_hz": s.B_W,
        "area_side_m": s.area_side,
        "seed": s.seed,
    }


def _check_keys(obj: Any, expected: Sequence[str], where: str, optional: Sequence[str] = ()) -> None:
    if not isinstance(obj, dict):
        raise ScenarioFormatError(f"{where} must be a JSON object")
    unknown = sorted(set(obj) - set(expected))
    if unknown:
        raise ScenarioFormatError(f"Unknown keys in {where}", details=f"keys: {unknown}")
    missing = sorted(set(expected) - set(obj) - set(optional))
    if missing:
        raise ScenarioFormatError(f"Missing keys in {where}", details=f"keys: {missing}")


def _number(obj: Dict[str, Any], key: str, where: str) -> float:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScenarioFormatError(f"{where}.{key} must be a finite number", details=f"value={value!r}")
    return float(value)


def scenario_from_dict(data: Any) -> Scenario:
    """Parse the scenario schema; unknown or missing keys are rejected."""
    _check_keys(data, SCENARIO_KEYS, "scenario", optional=("seed",))
    _check_keys(data["radio"], RADIO_KEYS, "radio")
    if not isinstance(data["users"], list) or not data["users"]:
        raise ScenarioFormatError("scenario.users must be a nonempty list")

    P = _number(data, "P_watts", "scenario")
    users = []
    for n, entry in enumerate(data["users"]):
        where = f"users[{n}]"
        _check_keys(entry, USER_KEYS, where)
        users.append(
            UserSpec(
                x=_number(entry, "x_m", where),
                y=_number(entry, "y_m", where),
                D=_number(entry, "D_bits", where),
                E=_number(entry, "E_bits", where),
                Q=_number(entry, "Q_joules", where),
                P=P,
            )
        )

    radio_data = data["radio"]
    radio = RadioConstants(
        h0_db=_number(radio_data, "h0_db", "radio"),
        sigma2_dbm_per_hz=_number(radio_data, "sigma2_dbm_per_hz", "radio"),
        a=_number(radio_data, "a_per_m", "radio"),
        f=_number(radio_data, "f_hz", "radio"),
    )

    seed = data.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ScenarioFormatError("scenario.seed must be an integer or null", details=f"seed={seed!r}")

    return Scenario(
        users=tuple(users),
        radio=radio,
        H=_number(data, "H_m", "scenario"),
        q=_number(data, "q_watts", "scenario"),
        B_W=_number(data, "B_W_hz", "scenario"),
        area_side=_number(data, "area_side_m", "scenario"),
        seed=seed,
    )


def dumps_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2) + "\n"


def loads_scenario(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioFormatError("Scenario is not valid JSON", details=str(e)) from e
    return scenario_from_dict(data)


def save_scenario(s: Scenario, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_scenario(s))


def load_scenario(path: Union[str, Path]) -> Scenario:
    return loads_scenario(Path(path).read_text())
