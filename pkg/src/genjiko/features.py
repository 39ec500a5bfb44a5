"""Recording -> model-ready windowed feature tensors.

Stages run in one fixed order: temporal differencing, high-pass FFT
filtering, standard scaling, then windowing.  The high-pass runs over the
full series before windowing to avoid per-window edge artifacts; provenance
records which stages were enabled so a tensor is self-describing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .sensing.recording import N_CHANNELS, Recording

SCALE_EPS = 1e-8

# window/stride presets at 10 Hz, spanning 5..30 s
WINDOW_PRESETS = (
    (50, 25),
    (100, 50),
    (150, 75),
    (200, 100),
    (300, 150),
)


@dataclass(frozen=True)
class WindowConfig:
    window_len: int
    stride: int

    def __post_init__(self):
        if not 1 <= self.stride <= self.window_len:
            raise DomainError(
                f"stride must satisfy 1 <= stride <= window_len, "
                f"got {self.stride} vs {self.window_len}"
            )

    def count(self, t: int) -> int:
        if t < self.window_len:
            raise DomainError(f"series of {t} frames is shorter than window {self.window_len}")
        return (t - self.window_len) // self.stride + 1

    def to_json(self) -> dict:
        return {"window_len": self.window_len, "stride": self.stride}

    @classmethod
    def from_json(cls, obj: dict) -> "WindowConfig":
        return cls(obj["window_len"], obj["stride"])


@dataclass(frozen=True)
class PreprocessFlags:
    diff: bool = False
    highpass_hz: float | None = None
    scale: bool = False

    def to_json(self) -> dict:
        return {"diff": self.diff, "highpass_hz": self.highpass_hz, "scale": self.scale}

    @classmethod
    def from_json(cls, obj: dict) -> "PreprocessFlags":
        return cls(obj.get("diff", False), obj.get("highpass_hz"), obj.get("scale", False))


class ScalerStats:
    """Per-channel mean / population std fitted on training data."""

    def __init__(self, mean, std):
        self.mean = np.asarray(mean, dtype=np.float64)
        self.std = np.asarray(std, dtype=np.float64)
        if self.mean.shape != (N_CHANNELS,) or self.std.shape != (N_CHANNELS,):
            raise DomainError("scaler stats must cover exactly the 9 channels")

    def __eq__(self, other):
        if not isinstance(other, ScalerStats):
            return NotImplemented
        return np.array_equal(self.mean, other.mean) and np.array_equal(self.std, other.std)

    def to_json(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "ScalerStats":
        return cls(obj["mean"], obj["std"])

    @classmethod
    def identity(cls) -> "ScalerStats":
        return cls(np.zeros(N_CHANNELS), np.ones(N_CHANNELS))


@dataclass
class FeatureTensor:
    data: np.ndarray  # (windows, time, channels)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[2] != N_CHANNELS:
            raise DomainError(f"feature tensor must be (windows, time, {N_CHANNELS})")
        if not np.isfinite(self.data).all():
            raise DomainError("feature tensor contains non-finite values")


def temporal_difference(series: np.ndarray) -> np.ndarray:
    series = np.asarray(series, dtype=np.float64)
    if series.shape[0] < 2:
        raise DomainError("differencing needs at least 2 frames")
    return np.diff(series, axis=0)


def highpass_fft(series: np.ndarray, cutoff_hz: float, rate_hz: float) -> np.ndarray:
    """Zero every FFT bin below cutoff_hz per channel; cutoff 0 is identity."""
    if cutoff_hz < 0:
        raise DomainError(f"cutoff_hz must be >= 0, got {cutoff_hz}")
    if rate_hz <= 0:
        raise DomainError(f"rate_hz must be > 0, got {rate_hz}")
    series = np.asarray(series, dtype=np.float64)
    t = series.shape[0]
    spectrum = np.fft.rfft(series, axis=0)
    freqs = np.fft.rfftfreq(t, d=1.0 / rate_hz)
    spectrum[freqs < cutoff_hz] = 0.0
    return np.fft.irfft(spectrum, n=t, axis=0)


def fit_scaler(data: np.ndarray) -> ScalerStats:
    """Population mean/std per channel over all rows of (N, 9) data."""
    data = np.asarray(data, dtype=np.float64)
    if data.size == 0:
        raise DomainError("cannot fit a scaler on an empty training set")
    if data.ndim == 3:
        data = data.reshape(-1, data.shape[-1])
    return ScalerStats(data.mean(axis=0), data.std(axis=0))


def apply_scaler(stats: ScalerStats, data: np.ndarray) -> np.ndarray:
    data = np.asarray(data, dtype=np.float64)
    return (data - stats.mean) / np.maximum(stats.std, SCALE_EPS)


def make_windows(series: np.ndarray, cfg: WindowConfig) -> np.ndarray:
    """Slice (T, 9) into (count, window_len, 9); window k starts at k*stride."""
    series = np.asarray(series, dtype=np.float64)
    count = cfg.count(series.shape[0])
    out = np.empty((count, cfg.window_len, series.shape[1]), dtype=np.float64)
    for k in range(count):
        start = k * cfg.stride
        out[k] = series[start : start + cfg.window_len]
    return out


def preprocess_series(series: np.ndarray, flags: PreprocessFlags, rate_hz: float) -> np.ndarray:
    """The pre-window stages (diff, highpass) shared by fit and transform."""
    if flags.diff:
        series = temporal_difference(series)
    if flags.highpass_hz is not None:
        series = highpass_fft(series, flags.highpass_hz, rate_hz)
    return series


def preprocess(
    recording: Recording,
    cfg: WindowConfig,
    stats: ScalerStats | None = None,
    flags: PreprocessFlags = PreprocessFlags(),
) -> FeatureTensor:
    if flags.scale and stats is None:
        raise DomainError("scaling requested but no scaler stats supplied")
    series = preprocess_series(recording.values, flags, recording.meta.sample_rate_hz)
    if flags.scale:
        series = apply_scaler(stats, series)
    windows = make_windows(series, cfg)
    provenance = {
        "recording_id": recording.meta.recording_id,
        "window": cfg.to_json(),
        "flags": flags.to_json(),
        "resampled": recording.meta.resampled,
    }
    return FeatureTensor(windows, provenance)
