"""Loaded classifier artifacts: the transformer and the centroid baseline.

A model carries its window config, preprocessing flags, and scaler stats,
so a raw sensor window goes in and a prediction comes out with no external
state.  Raw windows are unscaled sensor values; when differencing is
enabled the raw window is one frame longer than the model's feature
window so the differenced series has exactly window_len steps.
"""

from __future__ import annotations

import hashlib

import numpy as np

from ..errors import DomainError
from ..features import (
    PreprocessFlags,
    ScalerStats,
    WindowConfig,
    apply_scaler,
    highpass_fft,
    temporal_difference,
)
from .network import ModelConfig, TransformerNet, softmax
from .voting import Prediction

ARTIFACT_VERSION = 1


class ScentModel:
    kind = "abstract"

    def __init__(
        self,
        window: WindowConfig,
        flags: PreprocessFlags,
        scaler: ScalerStats,
        seed: int,
        version: int = ARTIFACT_VERSION,
        sample_rate_hz: float = 10.0,
    ):
        self.window = window
        self.flags = flags
        self.scaler = scaler
        self.seed = seed
        self.version = version
        self.sample_rate_hz = sample_rate_hz

    @property
    def raw_window_len(self) -> int:
        """Frames of raw sensor input one feature window consumes."""
        return self.window.window_len + (1 if self.flags.diff else 0)

    def features_from_raw(self, raw_windows: np.ndarray) -> np.ndarray:
        """(n, raw_window_len, 9) raw sensor windows -> feature windows.

        Differencing and (window-local) high-pass run per window here;
        batch evaluation and live streaming share this exact path.
        """
        raw_windows = np.asarray(raw_windows, dtype=np.float64)
        if raw_windows.ndim == 2:
            raw_windows = raw_windows[None]
        expected = (raw_windows.shape[0], self.raw_window_len, 9)
        if raw_windows.shape != expected:
            raise DomainError(
                f"window shape {raw_windows.shape[1:]} does not match the model's "
                f"expected ({self.raw_window_len}, 9)"
            )
        out = raw_windows
        if self.flags.diff:
            out = np.diff(out, axis=1)
        if self.flags.highpass_hz is not None:
            out = np.stack(
                [highpass_fft(w, self.flags.highpass_hz, self.sample_rate_hz) for w in out]
            )
        if self.flags.scale:
            out = apply_scaler(self.scaler, out)
        return out

    def predict_features(self, features: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict_batch(self, raw_windows: np.ndarray) -> np.ndarray:
        return self.predict_features(self.features_from_raw(raw_windows))

    def predict_window(self, raw_window: np.ndarray) -> Prediction:
        probs = self.predict_batch(np.asarray(raw_window)[None])[0]
        return Prediction.from_array(probs)

    def _common_header(self) -> dict:
        return {
            "kind": self.kind,
            "window": self.window.to_json(),
            "flags": self.flags.to_json(),
            "scaler": self.scaler.to_json(),
            "seed": self.seed,
            "sample_rate_hz": self.sample_rate_hz,
        }


class TransformerModel(ScentModel):
    kind = "transformer"

    def __init__(
        self,
        config: ModelConfig,
        window: WindowConfig,
        flags: PreprocessFlags,
        scaler: ScalerStats,
        params: dict[str, np.ndarray],
        seed: int,
        version: int = ARTIFACT_VERSION,
        sample_rate_hz: float = 10.0,
        train_losses: list[float] | None = None,
    ):
        super().__init__(window, flags, scaler, seed, version, sample_rate_hz)
        self.config = config
        # canonical storage is float32 (the artifact precision)
        self.params = {k: np.asarray(v, dtype=np.float32) for k, v in params.items()}
        self.net = TransformerNet(config)
        self.train_losses = list(train_losses or [])
        for value in self.params.values():
            if not np.isfinite(value).all():
                raise DomainError("model parameters must be finite")

    def _f64_params(self) -> dict[str, np.ndarray]:
        return {k: v.astype(np.float64) for k, v in self.params.items()}

    def predict_features(self, features: np.ndarray) -> np.ndarray:
        if features.shape[1] != self.window.window_len:
            raise DomainError(
                f"feature window has {features.shape[1]} steps, "
                f"model expects {self.window.window_len}"
            )
        return self.net.predict_probs(self._f64_params(), features)

    def checksum(self) -> str:
        digest = hashlib.sha256()
        for name in sorted(self.params):
            digest.update(name.encode())
            digest.update(np.ascontiguousarray(self.params[name]).tobytes())
        return digest.hexdigest()


class CentroidModel(ScentModel):
    """Nearest-centroid baseline over time-averaged channel vectors."""

    kind = "centroid"

    def __init__(
        self,
        centroids: np.ndarray,
        window: WindowConfig,
        flags: PreprocessFlags,
        scaler: ScalerStats,
        seed: int,
        version: int = ARTIFACT_VERSION,
        sample_rate_hz: float = 10.0,
    ):
        super().__init__(window, flags, scaler, seed, version, sample_rate_hz)
        self.centroids = np.asarray(centroids, dtype=np.float32)
        if self.centroids.shape != (5, 9):
            raise DomainError(f"centroids must be (5, 9), got {self.centroids.shape}")

    def predict_features(self, features: np.ndarray) -> np.ndarray:
        pooled = features.mean(axis=1)  # (n, 9)
        dists = np.linalg.norm(
            pooled[:, None, :] - self.centroids.astype(np.float64)[None], axis=2
        )
        return softmax(-dists, axis=-1)


def fit_centroids(features: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-class mean of the time-averaged channel vector of each window."""
    labels = np.asarray(labels)
    pooled = np.asarray(features).mean(axis=1)
    centroids = np.zeros((5, 9))
    for label in range(5):
        mask = labels == label
        if not mask.any():
            raise DomainError(f"class {label} missing from centroid training data")
        centroids[label] = pooled[mask].mean(axis=0)
    return centroids
