"""Seeded synthetic scent recordings standing in for physical sensors.

Each class has a fixed per-channel saturation delta (the plateau table in
``data/synth_plateaus.json``).  A channel's trace is a logistic rise from
its baseline toward baseline + plateau, plus a slow shared sinusoidal
drift and Gaussian noise.  With the noise turned off the output is exactly
the analytic signature curve, which makes the generator its own oracle.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import numpy as np

from ..errors import DomainError
from .recording import N_CHANNELS, Recording, RecordingMeta

N_CLASSES = 5
SAMPLE_RATE_HZ = 10.0


@lru_cache(maxsize=1)
def signature_params() -> dict:
    with resources.files("genjiko.data").joinpath("synth_plateaus.json").open("rb") as fh:
        params = json.load(fh)
    params["baselines"] = np.asarray(params["baselines"], dtype=np.float64)
    params["plateaus"] = np.asarray(params["plateaus"], dtype=np.float64)
    return params


def signature_curve(class_label: int, t_s) -> np.ndarray:
    """Noise-free analytic signature: (len(t_s), 9) channel values."""
    if not 0 <= class_label < N_CLASSES:
        raise DomainError(f"class_label must be 0..{N_CLASSES - 1}, got {class_label}")
    p = signature_params()
    t_s = np.asarray(t_s, dtype=np.float64)[:, None]
    rise = 1.0 / (1.0 + np.exp(-p["rise_rate_per_s"] * (t_s - p["rise_midpoint_s"])))
    phases = 2.0 * np.pi * np.arange(N_CHANNELS) / N_CHANNELS
    drift = p["drift_amplitude"] * np.sin(2.0 * np.pi * p["drift_freq_hz"] * t_s + phases)
    return p["baselines"] + p["plateaus"][class_label] * rise + drift


def synth_recording(
    class_label: int,
    seed: int,
    duration_s: float,
    environment: str = "indoor",
    time_of_day: str = "morning",
    *,
    noise_sigma: float | None = None,
    recording_id: str | None = None,
) -> Recording:
    """Deterministic synthetic recording at 10 Hz for one scent class."""
    if duration_s < 10:
        raise DomainError(f"duration_s must be >= 10, got {duration_s}")
    if noise_sigma is None:
        noise_sigma = signature_params()["default_noise_sigma"]
    n_frames = int(round(duration_s * SAMPLE_RATE_HZ))
    t_ms = np.arange(n_frames, dtype=np.int64) * 100
    values = signature_curve(class_label, t_ms / 1000.0)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        values = values + noise_sigma * rng.standard_normal(values.shape)
    meta = RecordingMeta(
        recording_id=recording_id or f"synth-c{class_label}-s{seed}",
        class_label=class_label,
        environment=environment,
        time_of_day=time_of_day,
        sample_rate_hz=SAMPLE_RATE_HZ,
        notes=f"synthetic scent, noise sigma {noise_sigma:g}",
    )
    return Recording(t_ms, values, meta)
