"""Canonical 9-channel gas-sensor recording format.

A recording is a strictly time-ordered series of frames sampled nominally
at 10 Hz, one row per frame in CSV with a fixed header, plus a JSON
metadata sidecar.  Values serialize with 6 decimal places; a recording
that has passed through the CSV form once round-trips byte-stably.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, replace

import numpy as np

from ..errors import DomainError, ParseError

CHANNELS = (
    "temp_c",
    "humidity_pct",
    "pressure_hpa",
    "tvoc_ppb",
    "eco2_ppm",
    "voc_raw",
    "no2_raw",
    "ethanol_raw",
    "co_raw",
)
N_CHANNELS = len(CHANNELS)
CSV_HEADER = "t_ms," + ",".join(CHANNELS)

ENVIRONMENTS = ("indoor", "outdoor")
TIMES_OF_DAY = ("morning", "evening")

NOMINAL_GAP_MS = 100.0
GAP_TOLERANCE_MS = 20.0  # 20% of the nominal 100 ms
MAX_GAP_MS = 500.0
FILL_THRESHOLD_MS = 150.0


@dataclass(frozen=True)
class SensorFrame:
    """One timestamped sample across all nine channels."""

    t_ms: int
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != N_CHANNELS:
            raise DomainError(f"expected {N_CHANNELS} channel values, got {len(self.values)}")

    def channel(self, name: str) -> float:
        return self.values[CHANNELS.index(name)]


@dataclass(frozen=True)
class RecordingMeta:
    recording_id: str
    class_label: int | None
    environment: str
    time_of_day: str
    sample_rate_hz: float = 10.0
    notes: str = ""
    resampled: bool = False

    def __post_init__(self):
        if self.environment not in ENVIRONMENTS:
            raise DomainError(f"environment must be one of {ENVIRONMENTS}")
        if self.time_of_day not in TIMES_OF_DAY:
            raise DomainError(f"time_of_day must be one of {TIMES_OF_DAY}")
        if self.class_label is not None and not 0 <= self.class_label <= 4:
            raise DomainError(f"class_label must be 0..4, got {self.class_label}")

    def to_json(self) -> dict:
        return {
            "recording_id": self.recording_id,
            "class_label": self.class_label,
            "environment": self.environment,
            "time_of_day": self.time_of_day,
            "sample_rate_hz": self.sample_rate_hz,
            "notes": self.notes,
            "resampled": self.resampled,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RecordingMeta":
        return cls(
            recording_id=obj["recording_id"],
            class_label=obj.get("class_label"),
            environment=obj["environment"],
            time_of_day=obj["time_of_day"],
            sample_rate_hz=obj.get("sample_rate_hz", 10.0),
            notes=obj.get("notes", ""),
            resampled=obj.get("resampled", False),
        )


class Recording:
    """Time-ordered sensor frames plus metadata.

    ``t_ms`` is an int64 array of timestamps and ``values`` a float64
    array of shape (frames, 9) in CSV channel order.
    """

    def __init__(self, t_ms, values, meta: RecordingMeta):
        t_ms = np.asarray(t_ms, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if t_ms.ndim != 1 or values.shape != (t_ms.shape[0], N_CHANNELS):
            raise DomainError(f"shape mismatch: {t_ms.shape} timestamps, {values.shape} values")
        if t_ms.shape[0] == 0:
            raise DomainError("a recording needs at least one frame")
        if t_ms[0] < 0:
            raise DomainError("timestamps must be non-negative")
        if t_ms.shape[0] > 1 and not (np.diff(t_ms) > 0).all():
            raise DomainError("timestamps must be strictly increasing")
        if not np.isfinite(values).all():
            raise DomainError("channel values must be finite")
        self.t_ms = t_ms
        self.values = values
        self.meta = meta

    def __len__(self) -> int:
        return self.t_ms.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Recording):
            return NotImplemented
        return (
            np.array_equal(self.t_ms, other.t_ms)
            and np.array_equal(self.values, other.values)
            and self.meta == other.meta
        )

    def frames(self):
        for i in range(len(self)):
            yield SensorFrame(int(self.t_ms[i]), tuple(float(v) for v in self.values[i]))


@dataclass(frozen=True)
class RateReport:
    median_gap_ms: float
    max_gap_ms: float
    out_of_spec: bool
    n_frames: int


def parse_recording(csv_bytes: bytes, meta_json_bytes: bytes) -> Recording:
    try:
        meta = RecordingMeta.from_json(json.loads(meta_json_bytes.decode("utf-8")))
    except (ValueError, KeyError, DomainError) as exc:
        raise ParseError(f"bad metadata: {exc}") from exc

    text = csv_bytes.decode("utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != CSV_HEADER:
        raise ParseError(f"header mismatch: expected {CSV_HEADER!r}", line=1)

    t_ms = np.empty(len(lines) - 1, dtype=np.int64)
    values = np.empty((len(lines) - 1, N_CHANNELS), dtype=np.float64)
    last_t = -1
    for i, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != N_CHANNELS + 1:
            raise ParseError(f"expected {N_CHANNELS + 1} cells, got {len(cells)}", line=i)
        try:
            t = int(cells[0])
            row = [float(c) for c in cells[1:]]
        except ValueError as exc:
            raise ParseError(f"non-numeric cell: {exc}", line=i) from exc
        if not all(np.isfinite(row)):
            raise ParseError("non-finite channel value", line=i)
        if t <= last_t:
            raise ParseError(f"timestamp {t} not after {last_t}", line=i)
        last_t = t
        t_ms[i - 2] = t
        values[i - 2] = row
    if t_ms.shape[0] == 0:
        raise ParseError("no data rows", line=2)
    return Recording(t_ms, values, meta)


def serialize_recording(recording: Recording) -> tuple[bytes, bytes]:
    """Recording -> (csv bytes, meta json bytes), 6 decimal places, LF."""
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for i in range(len(recording)):
        row = ",".join(f"{v:.6f}" for v in recording.values[i])
        out.write(f"{recording.t_ms[i]},{row}\n")
    meta_bytes = (json.dumps(recording.meta.to_json(), indent=2) + "\n").encode("utf-8")
    return out.getvalue().encode("utf-8"), meta_bytes


def validate_rate(recording: Recording) -> RateReport:
    if len(recording) < 2:
        raise DomainError("rate validation needs at least 2 frames")
    gaps = np.diff(recording.t_ms).astype(np.float64)
    median = float(np.median(gaps))
    biggest = float(gaps.max())
    out_of_spec = abs(median - NOMINAL_GAP_MS) > GAP_TOLERANCE_MS or biggest > MAX_GAP_MS
    return RateReport(median, biggest, out_of_spec, len(recording))


def gap_fill(recording: Recording) -> Recording:
    """Linearly interpolate frames onto the 100 ms grid across large gaps.

    Gaps over 150 ms get frames at t0+100, t0+200, ... (strictly before the
    next real frame); metadata is marked resampled only when frames were
    actually inserted, so the operation is idempotent.
    """
    t = recording.t_ms
    v = recording.values
    new_t: list[int] = []
    new_v: list[np.ndarray] = []
    inserted = False
    for i in range(len(recording) - 1):
        new_t.append(int(t[i]))
        new_v.append(v[i])
        gap = int(t[i + 1] - t[i])
        if gap > FILL_THRESHOLD_MS:
            step = int(NOMINAL_GAP_MS)
            for fill_t in range(int(t[i]) + step, int(t[i + 1]), step):
                frac = (fill_t - t[i]) / gap
                new_t.append(fill_t)
                new_v.append(v[i] + frac * (v[i + 1] - v[i]))
                inserted = True
    new_t.append(int(t[-1]))
    new_v.append(v[-1])
    if not inserted:
        return recording
    meta = replace(recording.meta, resampled=True)
    return Recording(np.array(new_t, dtype=np.int64), np.vstack(new_v), meta)
