"""Server configuration: JSON file plus environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import DomainError


@dataclass
class ServerConfig:
    port: int = 8765
    data_dir: str = "./gamedata"
    model_path: str | None = None
    llm_mode: str = "stub"  # stub | live
    llm_endpoint: str = ""
    llm_model: str = ""
    sensing_mode: str = "synth"  # synth | file
    sensing_speedup: float = 10.0
    sensing_duration_s: float = 30.0
    sensing_noise_sigma: float = 0.5
    static_dir: str | None = None  # built frontend assets, served at /app
    knowledge_dir: str | None = None  # overrides the bundled knowledge docs
    persona_path: str | None = None
    sequences: dict = field(default_factory=dict)  # sequence_id -> 5 labels

    def __post_init__(self):
        if self.llm_mode not in ("stub", "live"):
            raise DomainError(f"llm_mode must be stub or live, got {self.llm_mode!r}")
        if self.sensing_mode not in ("synth", "file"):
            raise DomainError(f"sensing_mode must be synth or file, got {self.sensing_mode!r}")


ENV_OVERRIDES = {
    "PORT": ("port", int),
    "DATA_DIR": ("data_dir", str),
    "MODEL_PATH": ("model_path", str),
    "LLM_MODE": ("llm_mode", str),
    "LLM_ENDPOINT": ("llm_endpoint", str),
}


def load_config(path=None, env=None) -> ServerConfig:
    env = os.environ if env is None else env
    values: dict = {}
    if path is not None:
        raw = Path(path).read_text(encoding="utf-8")
        try:
            values = json.loads(raw)
        except ValueError as exc:
            raise DomainError(f"config {path} is not valid JSON: {exc}") from exc
    for var, (key, cast) in ENV_OVERRIDES.items():
        if var in env and env[var] != "":
            values[key] = cast(env[var])
    known = set(ServerConfig.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise DomainError(f"unknown config keys: {sorted(unknown)}")
    return ServerConfig(**values)
