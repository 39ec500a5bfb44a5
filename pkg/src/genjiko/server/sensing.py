"""Rolling-window live inference over one round's frame stream."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model.models import ScentModel
from ..model.voting import Prediction, VoteState, accumulate_vote
from ..sensing.stream import FrameStream

N_CLASSES = 5
N_CHANNELS = 9


@dataclass
class LiveRoundResult:
    distribution: tuple[float, ...]
    low_confidence: bool
    trend_slopes: tuple[float, ...]
    n_windows: int


class RoundSensor:
    """Consumes frames, predicts every full stride, accumulates votes.

    The service cancels the consume task when the player finishes
    smelling; ``result()`` is valid at any point, including after only a
    partial stream (fewer frames than one window means a low-confidence
    uniform result).
    """

    def __init__(self, model: ScentModel, *, weighted: bool = False):
        self.model = model
        self.weighted = weighted
        self.state = VoteState()
        self._t_s: list[float] = []
        self._values: list[tuple[float, ...]] = []
        self._emitted = 0

    async def consume(self, stream: FrameStream, on_window=None):
        window_len = self.model.raw_window_len
        stride = self.model.window.stride
        async for frame in stream:
            self._t_s.append(frame.t_ms / 1000.0)
            self._values.append(frame.values)
            have = len(self._values)
            # window k starts at k*stride, same grid training used
            while have >= self._emitted * stride + window_len:
                start = self._emitted * stride
                window = np.asarray(self._values[start : start + window_len])
                prediction = self.model.predict_window(window)
                self.state = accumulate_vote(self.state, prediction, weighted=self.weighted)
                self._emitted += 1
                if on_window is not None:
                    await on_window(self._emitted - 1, prediction, self.state)

    def result(self) -> LiveRoundResult:
        return LiveRoundResult(
            distribution=self.state.distribution,
            low_confidence=self.state.total == 0,
            trend_slopes=self._slopes(),
            n_windows=self.state.total,
        )

    def _slopes(self) -> tuple[float, ...]:
        if len(self._t_s) < 2:
            return (0.0,) * N_CHANNELS
        t = np.asarray(self._t_s)
        v = np.asarray(self._values)
        t_centered = t - t.mean()
        denom = float((t_centered**2).sum())
        if denom == 0:
            return (0.0,) * N_CHANNELS
        slopes = (t_centered @ (v - v.mean(axis=0))) / denom
        return tuple(float(s) for s in slopes)
