"""Paced frame delivery from a recording, standing in for a live feed."""

from __future__ import annotations

import asyncio
import math
import time

from ..errors import DomainError
from .recording import Recording, SensorFrame


class FrameStream:
    """Delivers a recording's frames at real-time / speedup pacing.

    Each iteration starts its own cursor and clock, so concurrent streams
    over the same recording never interfere.  ``speedup=math.inf`` drains
    immediately, which is what tests and headless simulation use.
    Supports both synchronous and asynchronous iteration.
    """

    def __init__(self, recording: Recording, speedup: float = 1.0):
        if not speedup > 0:
            raise DomainError(f"speedup must be positive, got {speedup}")
        self.recording = recording
        self.speedup = speedup

    def _delay_s(self, index: int, started: float, now: float) -> float:
        if math.isinf(self.speedup):
            return 0.0
        offset = (self.recording.t_ms[index] - self.recording.t_ms[0]) / 1000.0
        return started + offset / self.speedup - now

    def __iter__(self):
        started = time.monotonic()
        for i, frame in enumerate(self._frames()):
            delay = self._delay_s(i, started, time.monotonic())
            if delay > 0:
                time.sleep(delay)
            yield frame

    async def __aiter__(self):
        started = time.monotonic()
        for i, frame in enumerate(self._frames()):
            delay = self._delay_s(i, started, time.monotonic())
            if delay > 0:
                await asyncio.sleep(delay)
            yield frame

    def _frames(self):
        rec = self.recording
        for i in range(len(rec)):
            yield SensorFrame(int(rec.t_ms[i]), tuple(float(v) for v in rec.values[i]))


def open_stream(recording: Recording, speedup: float = 1.0) -> FrameStream:
    return FrameStream(recording, speedup)
