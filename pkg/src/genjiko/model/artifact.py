"""Single-file model artifact.

Layout: magic ``GNJI``, u16 version, u32 header length, JSON header
(configs, scaler, parameter manifest), a raw little-endian float32
parameter block in header order, and a trailing CRC32 over everything
before it.  Loading verifies magic, version, length, and checksum before
constructing anything, so a truncated file never yields a partial model.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from ..errors import ArtifactError
from ..features import PreprocessFlags, ScalerStats, WindowConfig
from .models import ARTIFACT_VERSION, CentroidModel, ScentModel, TransformerModel
from .network import ModelConfig

MAGIC = b"GNJI"


def _param_items(model: ScentModel) -> list[tuple[str, np.ndarray]]:
    if isinstance(model, TransformerModel):
        return [(name, model.params[name]) for name in sorted(model.params)]
    if isinstance(model, CentroidModel):
        return [("centroids", model.centroids)]
    raise ArtifactError(f"cannot serialize model kind {model.kind!r}")


def save_model(model: ScentModel, path) -> Path:
    path = Path(path)
    items = _param_items(model)
    header = model._common_header()
    header["version"] = model.version
    header["params"] = [{"name": n, "shape": list(a.shape)} for n, a in items]
    if isinstance(model, TransformerModel):
        header["model_config"] = model.config.to_json()
        header["train_losses"] = model.train_losses
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")

    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<H", model.version)
    blob += struct.pack("<I", len(header_bytes))
    blob += header_bytes
    for _, array in items:
        blob += np.ascontiguousarray(array, dtype="<f4").tobytes()
    blob += struct.pack("<I", zlib.crc32(bytes(blob)))
    path.write_bytes(bytes(blob))
    return path


def load_model(path) -> ScentModel:
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < 14 or blob[:4] != MAGIC:
        raise ArtifactError(f"{path}: not a model artifact (bad magic)")
    (stored_crc,) = struct.unpack("<I", blob[-4:])
    if zlib.crc32(blob[:-4]) != stored_crc:
        raise ArtifactError(f"{path}: checksum mismatch (truncated or corrupt)")
    (version,) = struct.unpack("<H", blob[4:6])
    if version != ARTIFACT_VERSION:
        raise ArtifactError(f"{path}: artifact version {version}, expected {ARTIFACT_VERSION}")
    (header_len,) = struct.unpack("<I", blob[6:10])
    header_end = 10 + header_len
    try:
        header = json.loads(blob[10:header_end].decode("utf-8"))
    except ValueError as exc:
        raise ArtifactError(f"{path}: unreadable header: {exc}") from exc

    offset = header_end
    arrays: dict[str, np.ndarray] = {}
    for spec in header["params"]:
        shape = tuple(spec["shape"])
        count = int(np.prod(shape)) if shape else 1
        end = offset + 4 * count
        if end > len(blob) - 4:
            raise ArtifactError(f"{path}: parameter block shorter than header promises")
        arrays[spec["name"]] = np.frombuffer(
            blob[offset:end], dtype="<f4"
        ).reshape(shape).copy()
        offset = end
    if offset != len(blob) - 4:
        raise ArtifactError(f"{path}: trailing bytes after parameter block")

    window = WindowConfig.from_json(header["window"])
    flags = PreprocessFlags.from_json(header["flags"])
    scaler = ScalerStats.from_json(header["scaler"])
    common = dict(
        window=window,
        flags=flags,
        scaler=scaler,
        seed=header["seed"],
        version=version,
        sample_rate_hz=header.get("sample_rate_hz", 10.0),
    )
    if header["kind"] == "transformer":
        return TransformerModel(
            config=ModelConfig.from_json(header["model_config"]),
            params=arrays,
            train_losses=header.get("train_losses", []),
            **common,
        )
    if header["kind"] == "centroid":
        return CentroidModel(centroids=arrays["centroids"], **common)
    raise ArtifactError(f"{path}: unknown model kind {header['kind']!r}")
