"""Deterministic engine and simulator for a decentralized autonomous building."""

from .engine import Engine, GenesisConfig
from .errors import EngineError

__all__ = ["Engine", "GenesisConfig", "EngineError"]
__version__ = "0.1.0"
