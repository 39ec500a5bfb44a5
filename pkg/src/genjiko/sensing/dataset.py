"""Dataset manifests: (csv, meta) pairs tagged with train/test splits."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..errors import DomainError, ParseError
from .recording import ENVIRONMENTS, TIMES_OF_DAY, Recording, parse_recording, serialize_recording
from .synth import N_CLASSES, synth_recording

SPLITS = ("train", "test")


@dataclass(frozen=True)
class ManifestEntry:
    csv: str
    meta: str
    split: str

    def __post_init__(self):
        if self.split not in SPLITS:
            raise DomainError(f"split must be one of {SPLITS}, got {self.split!r}")


class DatasetManifest:
    """A manifest.json plus the directory its relative paths resolve in."""

    def __init__(self, root: Path, entries: list[ManifestEntry]):
        self.root = Path(root)
        self.entries = list(entries)

    def split(self, name: str) -> list[ManifestEntry]:
        if name not in SPLITS:
            raise DomainError(f"unknown split {name!r}")
        return [e for e in self.entries if e.split == name]

    def load(self, entry: ManifestEntry) -> Recording:
        csv_bytes = (self.root / entry.csv).read_bytes()
        meta_bytes = (self.root / entry.meta).read_bytes()
        return parse_recording(csv_bytes, meta_bytes)

    def recordings(self, split_name: str):
        for entry in self.split(split_name):
            yield self.load(entry)

    def save(self, path: Path | None = None) -> Path:
        path = Path(path) if path else self.root / "manifest.json"
        payload = {
            "entries": [
                {"csv": e.csv, "meta": e.meta, "split": e.split} for e in self.entries
            ]
        }
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        return path


def load_manifest(path: Path) -> DatasetManifest:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        entries = [
            ManifestEntry(e["csv"], e["meta"], e["split"]) for e in payload["entries"]
        ]
    except (ValueError, KeyError) as exc:
        raise ParseError(f"bad manifest {path}: {exc}") from exc
    return DatasetManifest(path.parent, entries)


def write_recording(recording: Recording, directory: Path) -> ManifestEntry:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rec_id = recording.meta.recording_id
    csv_bytes, meta_bytes = serialize_recording(recording)
    (directory / f"{rec_id}.csv").write_bytes(csv_bytes)
    (directory / f"{rec_id}.meta.json").write_bytes(meta_bytes)
    return ManifestEntry(f"{rec_id}.csv", f"{rec_id}.meta.json", "train")


def build_synth_dataset(
    out_dir: Path,
    *,
    train_per_class: int = 6,
    test_per_class: int = 2,
    duration_s: float = 120.0,
    base_seed: int = 7,
    noise_sigma: float = 0.5,
) -> DatasetManifest:
    """Write a balanced synthetic dataset and its manifest to out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    combos = [(env, tod) for env in ENVIRONMENTS for tod in TIMES_OF_DAY]
    for label in range(N_CLASSES):
        for idx in range(train_per_class + test_per_class):
            split = "train" if idx < train_per_class else "test"
            env, tod = combos[idx % len(combos)]
            rec = synth_recording(
                label,
                seed=base_seed * 100_000 + label * 1_000 + idx,
                duration_s=duration_s,
                environment=env,
                time_of_day=tod,
                noise_sigma=noise_sigma,
                recording_id=f"c{label}-{split}-{idx:02d}",
            )
            entry = write_recording(rec, out_dir)
            entries.append(ManifestEntry(entry.csv, entry.meta, split))
    manifest = DatasetManifest(out_dir, entries)
    manifest.save()
    return manifest
