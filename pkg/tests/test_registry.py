from __future__ import annotations

import pytest

from dab.errors import EngineError
from dab.registry import AutomationRegistry, to_physical, to_stored

GOVERNOR = "0x" + "11" * 20
OTHER = "0x" + "22" * 20


@pytest.fixture()
def registry():
    return AutomationRegistry("0x" + "33" * 20, GOVERNOR)


def test_fresh_defaults(registry):
    assert registry.get_all() == {
        "min_temperature": 20.0, "max_temperature": 27.0,
        "min_humidity": 40.0, "max_humidity": 100.0,
        "min_luminance": 50.0, "max_luminance": 150.0,
        "min_co": 400.0, "max_co": 1000.0,
    }


def test_governor_write_and_change_event(registry):
    registry.set_threshold(GOVERNOR, "min_temperature", 170, block=9)
    assert registry.get_threshold("min_temperature") == 17.0
    assert registry.change_log == [(9, "min_temperature", 170)]


def test_non_governor_write_unauthorized(registry):
    with pytest.raises(EngineError) as e:
        registry.set_threshold(OTHER, "min_temperature", 170, block=1)
    assert e.value.code == "Unauthorized"


def test_inverted_range_rejected(registry):
    with pytest.raises(EngineError) as e:
        registry.set_threshold(GOVERNOR, "min_temperature", 300, block=1)
    assert e.value.code == "InvertedRange"
    # lowering the max below the min is symmetric
    with pytest.raises(EngineError):
        registry.set_threshold(GOVERNOR, "max_humidity", 30, block=1)


def test_unknown_key(registry):
    with pytest.raises(EngineError) as e:
        registry.get_threshold("min_noise")
    assert e.value.code == "UnknownKey"
    with pytest.raises(EngineError):
        registry.set_threshold(GOVERNOR, "min_noise", 1, block=1)


def test_temperature_deci_degree_scaling():
    assert to_stored("min_temperature", 17) == 170
    assert to_stored("min_temperature", 17.5) == 175
    assert to_physical("min_temperature", 175) == 17.5
    assert to_stored("min_co", 400) == 400
    with pytest.raises(EngineError):
        to_stored("min_temperature", 17.55)  # finer than 0.1 degC
    with pytest.raises(EngineError):
        to_stored("min_co", 400.5)  # ppm thresholds are integers


def test_read_stability(registry):
    first = registry.get_all()
    assert registry.get_all() == first
    assert registry.get_all() == first
