"""Injectable time sources.

Services never call ``time.time()`` directly; they take a clock so tests
and simulations can run on accelerated timelines.
"""

from __future__ import annotations

import time
from typing import Protocol


class Clock(Protocol):
    def now(self) -> int:
        """Current epoch time in whole seconds."""
        ...


class SystemClock:
    def now(self) -> int:
        return int(time.time())


class ManualClock:
    """Clock advanced explicitly by the caller."""

    def __init__(self, start: int = 0):
        self._now = int(start)

    def now(self) -> int:
        return self._now

    def set(self, epoch: int) -> None:
        self._now = int(epoch)

    def advance(self, seconds: int) -> int:
        self._now += int(seconds)
        return self._now
