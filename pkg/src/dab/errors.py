"""Coded errors shared by the engine, contracts, and API layer.

Every failure that a caller can provoke carries a stable machine-readable
code. The API maps ``EngineError`` to HTTP 4xx with the code in the body;
anything else escaping the engine is a bug and surfaces as 5xx.
"""

from __future__ import annotations


class EngineError(Exception):
    """A rejected operation. ``code`` is stable; ``message`` is for humans."""

    def __init__(self, code: str, message: str = ""):
        self.code = code
        self.message = message or code
        super().__init__(f"{code}: {self.message}" if message else code)


def err(code: str, message: str = "") -> EngineError:
    return EngineError(code, message)
