"""Discrete-time room simulation: first-order dynamics plus energy metering.

The dynamics are deliberately the simplest forms with the right monotone
behavior: each variable relaxes toward its ambient value and appliances
push against it in a fixed direction. Control policies only ever rely on
those monotonicities, never on the particular gains. Energy accumulates in
integer milliwatt-seconds so meter arithmetic is exact end to end.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Dict, List, Optional

from .errors import err

APPLIANCE_KINDS = ("fan", "purifier", "humidifier", "light")

LEVEL_RANGES = {
    "fan": (0, 3),
    "purifier": (0, 7),
    "humidifier": (0, 3),
    "light": (0, 100),  # brightness percent, multiples of 10
}

# Watts drawn at each level.
DEFAULT_POWER = {
    "fan": {0: 0.0, 1: 15.0, 2: 30.0, 3: 45.0},
    "purifier": {level: 8.0 * level for level in range(8)},
    "humidifier": {0: 0.0, 1: 10.0, 2: 20.0, 3: 30.0},
    # light draws 9 W at full brightness, linear in between
    "light": {level: 9.0 * level / 100 for level in range(0, 101, 10)},
}


@dataclass(frozen=True)
class EnvState:
    temperature: float  # degC, 0.1 resolution at readout
    humidity: float     # % RH
    luminance: float    # lux
    co: float           # ppm
    occupancy: int
    sim_time: int       # seconds


@dataclass
class SimConfig:
    ambient_temperature: float = 28.0
    ambient_humidity: float = 45.0
    natural_lux: float = 34.0
    ambient_co: float = 752.0
    relax_temperature: float = 0.0002   # 1/s toward ambient
    relax_humidity: float = 0.0001
    relax_co: float = 0.0001
    fan_cooling: float = 0.0003         # degC/s per fan level
    light_gain: float = 1.5             # lux per brightness percent
    humidifier_gain: float = 0.002      # %RH/s per level
    purifier_scrub: float = 0.03        # ppm/s per level
    occupant_heat: float = 0.00005      # degC/s per person
    occupant_co: float = 0.02           # ppm/s per person
    energy_scale: int = 4               # readout multiplier
    power_watts: Dict[str, Dict[int, float]] = field(default_factory=lambda: {
        kind: dict(table) for kind, table in DEFAULT_POWER.items()
    })
    occupancy_refresh: int = 600        # seconds between stream redraws

    def validate(self) -> None:
        rates = (self.relax_temperature, self.relax_humidity, self.relax_co,
                 self.fan_cooling, self.light_gain, self.humidifier_gain,
                 self.purifier_scrub, self.occupant_heat, self.occupant_co)
        if any(r < 0 for r in rates):
            raise err("BadSimConfig", "rates and gains must be non-negative")
        if self.energy_scale <= 0:
            raise err("BadSimConfig", "energy scale must be positive")
        if not 0 <= self.ambient_humidity <= 100:
            raise err("BadSimConfig", "ambient humidity out of [0, 100]")


def validate_level(kind: str, level: int) -> None:
    if kind not in LEVEL_RANGES:
        raise err("UnknownDevice", kind)
    lo, hi = LEVEL_RANGES[kind]
    if not isinstance(level, int) or not lo <= level <= hi:
        raise err("LevelOutOfRange", f"{kind} level {level} not in [{lo}, {hi}]")
    if kind == "light" and level % 10 != 0:
        raise err("LevelOutOfRange", "light brightness moves in steps of 10")


class OccupancyStream:
    """Seeded uniform draws in [1, 10], one per refresh window."""

    def __init__(self, seed: int, period: int):
        if period <= 0:
            raise err("BadSimConfig", "occupancy period must be positive")
        self.seed = seed
        self.period = period
        self._rng = random.Random(seed)
        self._draws: List[int] = []

    def value_at(self, sim_time: int) -> int:
        window = sim_time // self.period
        while len(self._draws) <= window:
            self._draws.append(self._rng.randint(1, 10))
        return self._draws[window]


class BuildingSim:
    """One simulated room. Exactly one driver may call tick()."""

    def __init__(self, config: SimConfig = None, seed: int = 0):
        self.reset(config or SimConfig(), seed)

    def reset(self, config: SimConfig, seed: int) -> None:
        config.validate()
        self.config = config
        self.seed = seed
        self.temperature = config.ambient_temperature
        self.humidity = config.ambient_humidity
        self.co = config.ambient_co
        self.sim_time = 0
        self.occupancy = 0
        self.levels: Dict[str, int] = {kind: 0 for kind in APPLIANCE_KINDS}
        self.energy_mws = 0  # integer milliwatt-seconds, raw (unscaled)
        self._stream: Optional[OccupancyStream] = None

    # -- appliances ------------------------------------------------------

    def set_appliance(self, kind: str, level: int) -> int:
        validate_level(kind, level)
        previous = self.levels[kind]
        self.levels[kind] = level
        return previous

    def power_mw(self) -> int:
        total = 0
        for kind, level in self.levels.items():
            table = self.config.power_watts.get(kind, DEFAULT_POWER[kind])
            total += round(table[level] * 1000)
        return total

    # -- occupancy ----------------------------------------------------------

    def set_occupancy(self, n: int) -> None:
        if n < 0:
            raise err("BadOccupancy", "occupancy cannot be negative")
        self._stream = None
        self.occupancy = n

    def occupancy_stream(self, seed: int, period: int = None) -> OccupancyStream:
        stream = OccupancyStream(seed, period or self.config.occupancy_refresh)
        self._stream = stream
        self.occupancy = stream.value_at(self.sim_time)
        return stream

    # -- dynamics ----------------------------------------------------------

    def tick(self, dt: int) -> EnvState:
        if not isinstance(dt, int) or dt <= 0:
            raise err("BadTick", "dt must be a positive integer second count")
        cfg = self.config
        if self._stream is not None:
            self.occupancy = self._stream.value_at(self.sim_time)
        occ = self.occupancy

        self.energy_mws += self.power_mw() * dt

        self.temperature += (
            cfg.relax_temperature * (cfg.ambient_temperature - self.temperature)
            + cfg.occupant_heat * occ
            - cfg.fan_cooling * self.levels["fan"]
        ) * dt
        self.humidity += (
            cfg.humidifier_gain * self.levels["humidifier"]
            - cfg.relax_humidity * (self.humidity - cfg.ambient_humidity)
        ) * dt
        self.humidity = min(100.0, max(0.0, self.humidity))
        self.co += (
            cfg.occupant_co * occ
            - cfg.purifier_scrub * self.levels["purifier"]
            - cfg.relax_co * (self.co - cfg.ambient_co)
        ) * dt
        self.co = max(cfg.ambient_co, self.co)

        self.sim_time += dt
        if self._stream is not None:
            self.occupancy = self._stream.value_at(self.sim_time)
        return self.read_sensors()

    def luminance(self) -> float:
        return self.config.natural_lux + self.config.light_gain * self.levels["light"]

    def read_sensors(self) -> EnvState:
        return EnvState(
            temperature=round(self.temperature, 1),
            humidity=round(self.humidity, 2),
            luminance=round(self.luminance(), 2),
            co=round(self.co, 2),
            occupancy=self.occupancy,
            sim_time=self.sim_time,
        )

    # -- energy ------------------------------------------------------------

    def read_energy_raw_kwh(self) -> Decimal:
        return Decimal(self.energy_mws) / Decimal(3_600_000_000)

    def read_energy_kwh(self) -> Decimal:
        """Scaled meter readout (raw consumption times the readout factor)."""
        return self.read_energy_raw_kwh() * self.config.energy_scale
