"""In-process event stream with gap-free sequence numbers.

The engine publishes every observable state change here; the API's SSE
endpoint replays from the ring buffer and then follows the live tail.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass
from typing import Deque, List

from .errors import err

BUFFER_SIZE = 10_000

EVENT_KINDS = ("block", "proposal_state", "booking", "env_tick", "agent_decision")


@dataclass(frozen=True)
class EventEnvelope:
    sequence: int
    kind: str
    payload: dict


class EventBus:
    def __init__(self, buffer_size: int = BUFFER_SIZE):
        self._buffer: Deque[EventEnvelope] = deque(maxlen=buffer_size)
        self._next_sequence = 1
        self._lock = threading.Lock()

    def emit(self, kind: str, payload: dict) -> EventEnvelope:
        with self._lock:
            event = EventEnvelope(self._next_sequence, kind, payload)
            self._next_sequence += 1
            self._buffer.append(event)
            return event

    @property
    def current_sequence(self) -> int:
        return self._next_sequence - 1

    def replay(self, from_sequence: int) -> List[EventEnvelope]:
        """Events with sequence >= from_sequence still held in the buffer."""
        with self._lock:
            if from_sequence > self._next_sequence:
                raise err("SequenceTooOld",
                          f"from_sequence {from_sequence} is ahead of the stream")
            if self._buffer and from_sequence < self._buffer[0].sequence:
                raise err("SequenceTooOld",
                          f"sequence {from_sequence} fell out of the buffer")
            return [e for e in self._buffer if e.sequence >= from_sequence]

    def since(self, last_seen: int) -> List[EventEnvelope]:
        """Live tail helper: everything newer than last_seen, no gap checks."""
        with self._lock:
            return [e for e in self._buffer if e.sequence > last_seen]
