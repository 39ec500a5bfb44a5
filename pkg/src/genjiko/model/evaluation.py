"""Window-level and voted recording-level evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError
from ..features import WindowConfig, make_windows
from ..sensing.dataset import DatasetManifest
from .models import ScentModel
from .voting import Prediction, VoteState, accumulate_vote, vote_result

N_CLASSES = 5


@dataclass
class RecordingResult:
    recording_id: str
    label: int
    voted: int
    n_windows: int
    window_hits: int


@dataclass
class Metrics:
    window_accuracy: float
    voted_accuracy: float
    confusion: list[list[int]]  # rows: true class, cols: predicted, window level
    per_recording: list[RecordingResult] = field(default_factory=list)

    @property
    def n_windows(self) -> int:
        return int(sum(sum(row) for row in self.confusion))

    def to_json(self) -> dict:
        return {
            "window_accuracy": self.window_accuracy,
            "voted_accuracy": self.voted_accuracy,
            "n_windows": self.n_windows,
            "confusion": self.confusion,
            "per_recording": [
                {
                    "recording_id": r.recording_id,
                    "label": r.label,
                    "voted": r.voted,
                    "n_windows": r.n_windows,
                    "window_hits": r.window_hits,
                }
                for r in self.per_recording
            ],
        }


def raw_windows_for(model: ScentModel, values: np.ndarray) -> np.ndarray:
    """Slice a recording's raw values into the model's raw window grid."""
    cfg = WindowConfig(model.raw_window_len, model.window.stride)
    return make_windows(values, cfg)


def evaluate(
    model: ScentModel,
    manifest: DatasetManifest,
    split: str = "test",
    *,
    weighted_votes: bool = False,
) -> Metrics:
    entries = manifest.split(split)
    if not entries:
        raise DomainError(f"split {split!r} is empty")
    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    per_recording = []
    voted_hits = 0
    for entry in entries:
        rec = manifest.load(entry)
        if rec.meta.class_label is None:
            raise DomainError(f"recording {rec.meta.recording_id} has no class label")
        label = rec.meta.class_label
        probs = model.predict_batch(raw_windows_for(model, rec.values))
        state = VoteState()
        hits = 0
        for row in probs:
            pred = Prediction.from_array(row)
            state = accumulate_vote(state, pred, weighted=weighted_votes)
            confusion[label, pred.argmax] += 1
            hits += pred.argmax == label
        voted = vote_result(state)
        voted_hits += voted == label
        per_recording.append(
            RecordingResult(rec.meta.recording_id, label, voted, probs.shape[0], hits)
        )
    total_windows = int(confusion.sum())
    return Metrics(
        window_accuracy=float(np.trace(confusion)) / total_windows,
        voted_accuracy=voted_hits / len(entries),
        confusion=confusion.tolist(),
        per_recording=per_recording,
    )
