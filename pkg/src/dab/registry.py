"""On-ledger comfort-threshold store with governance-gated writes.

Temperature is held in deci-degrees so the store stays integer-only; every
read surface converts back to physical units. Writes must come from the
governor executing a proposal — there is no other mutation path.
"""

from __future__ import annotations

import copy
from typing import Dict, List, Tuple

from .canonical import enc_list, enc_str, enc_uint
from .errors import err

THRESHOLD_KEYS = (
    "min_temperature", "max_temperature",
    "min_humidity", "max_humidity",
    "min_luminance", "max_luminance",
    "min_co", "max_co",
)

# Internal scale per key family: temperature is deci-degrees, rest are unit.
_SCALE = {"temperature": 10, "humidity": 1, "luminance": 1, "co": 1}

DEFAULT_THRESHOLDS: Dict[str, int] = {
    "min_temperature": 200, "max_temperature": 270,  # 20.0 .. 27.0 degC
    "min_humidity": 40, "max_humidity": 100,         # % RH
    "min_luminance": 50, "max_luminance": 150,       # lux
    "min_co": 400, "max_co": 1000,                   # ppm
}


def family_of(key: str) -> str:
    return key.split("_", 1)[1]


def scale_of(key: str) -> int:
    return _SCALE[family_of(key)]


def to_physical(key: str, stored: int) -> float:
    value = stored / scale_of(key)
    return value if scale_of(key) > 1 else float(stored)


def to_stored(key: str, physical: float) -> int:
    scaled = physical * scale_of(key)
    if abs(scaled - round(scaled)) > 1e-9:
        raise err("BadThresholdValue",
                  f"{key} resolution is 1/{scale_of(key)} units")
    return int(round(scaled))


class AutomationRegistry:
    """Threshold table plus the change log the agent and twin read from."""

    def __init__(self, contract_address: str, governor_address: str,
                 defaults: Dict[str, int] = None):
        self.contract_address = contract_address
        self.governor_address = governor_address
        self.values: Dict[str, int] = dict(defaults or DEFAULT_THRESHOLDS)
        self.change_log: List[Tuple[int, str, int]] = []  # (block, key, stored)

    def set_threshold(self, caller: str, key: str, stored_value: int,
                      block: int) -> None:
        if caller != self.governor_address:
            raise err("Unauthorized", "only the governor may set thresholds")
        if key not in THRESHOLD_KEYS:
            raise err("UnknownKey", key)
        lo_key = "min_" + family_of(key)
        hi_key = "max_" + family_of(key)
        lo = stored_value if key == lo_key else self.values[lo_key]
        hi = stored_value if key == hi_key else self.values[hi_key]
        if lo > hi:
            raise err("InvertedRange", f"{lo_key} {lo} > {hi_key} {hi}")
        self.values[key] = stored_value
        self.change_log.append((block, key, stored_value))

    def get_threshold(self, key: str) -> float:
        if key not in THRESHOLD_KEYS:
            raise err("UnknownKey", key)
        return to_physical(key, self.values[key])

    def get_all(self) -> Dict[str, float]:
        return {key: to_physical(key, self.values[key]) for key in THRESHOLD_KEYS}

    def get_all_stored(self) -> Dict[str, int]:
        return dict(self.values)

    # -- engine plumbing ---------------------------------------------------

    def snapshot(self):
        return copy.deepcopy((self.values, self.change_log))

    def restore(self, snap) -> None:
        self.values, self.change_log = copy.deepcopy(snap)

    def digest_bytes(self) -> bytes:
        return enc_str("registry") + enc_list(
            enc_str(k) + enc_uint(self.values[k]) for k in THRESHOLD_KEYS
        )
