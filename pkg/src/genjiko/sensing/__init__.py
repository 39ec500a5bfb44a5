from .recording import (
    CHANNELS,
    CSV_HEADER,
    N_CHANNELS,
    RateReport,
    Recording,
    RecordingMeta,
    SensorFrame,
    gap_fill,
    parse_recording,
    serialize_recording,
    validate_rate,
)
from .stream import FrameStream, open_stream
from .synth import signature_curve, synth_recording
from .dataset import (
    DatasetManifest,
    ManifestEntry,
    build_synth_dataset,
    load_manifest,
    write_recording,
)

__all__ = [
    "CHANNELS",
    "CSV_HEADER",
    "N_CHANNELS",
    "RateReport",
    "Recording",
    "RecordingMeta",
    "SensorFrame",
    "gap_fill",
    "parse_recording",
    "serialize_recording",
    "validate_rate",
    "FrameStream",
    "open_stream",
    "signature_curve",
    "synth_recording",
    "DatasetManifest",
    "ManifestEntry",
    "build_synth_dataset",
    "load_manifest",
    "write_recording",
]
