"""Per-window predictions and accumulative voting across a stream."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError

N_CLASSES = 5


@dataclass(frozen=True)
class Prediction:
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.probs) != N_CLASSES:
            raise DomainError(f"prediction needs {N_CLASSES} class probabilities")
        if any(p < 0 for p in self.probs) or abs(sum(self.probs) - 1.0) > 1e-9:
            raise DomainError(f"probabilities must be non-negative and sum to 1: {self.probs}")

    @classmethod
    def from_array(cls, probs) -> "Prediction":
        arr = np.asarray(probs, dtype=np.float64)
        arr = arr / arr.sum()  # kill float drift before the strict check
        return cls(tuple(float(p) for p in arr))

    @classmethod
    def uniform(cls) -> "Prediction":
        return cls((1.0 / N_CLASSES,) * N_CLASSES)

    @property
    def argmax(self) -> int:
        # ties break toward the lowest class index
        return int(np.argmax(self.probs))


@dataclass(frozen=True)
class VoteState:
    counts: tuple[float, ...] = (0.0,) * N_CLASSES
    total: int = 0

    @property
    def distribution(self) -> tuple[float, ...]:
        if self.total == 0:
            return (1.0 / N_CLASSES,) * N_CLASSES
        return tuple(c / self.total for c in self.counts)


def accumulate_vote(state: VoteState, prediction: Prediction, *, weighted: bool = False) -> VoteState:
    """Add one window's vote: +1 on the argmax class, or the probabilities
    themselves when weighted voting is enabled."""
    counts = list(state.counts)
    if weighted:
        for i, p in enumerate(prediction.probs):
            counts[i] += p
    else:
        counts[prediction.argmax] += 1.0
    return VoteState(tuple(counts), state.total + 1)


def vote_result(state: VoteState) -> int:
    if state.total == 0:
        raise DomainError("no votes accumulated")
    return int(np.argmax(state.counts))
