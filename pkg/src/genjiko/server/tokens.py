"""Join tokens and the scent-sequence registry.

A token is what the QR code on the table encodes: an opaque URL-safe
string bound to one predefined scent sequence.  Tokens are single-use by
default; the service consumes one when it creates the session.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from dataclasses import dataclass, replace
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from ..errors import DomainError, TokenError
from ..session import ScentSequence

MIN_TOKEN_CHARS = 16


@dataclass(frozen=True)
class TokenRecord:
    token: str
    sequence_id: str
    created_at_ms: int
    single_use: bool = True
    used: bool = False

    def to_json(self) -> dict:
        return {
            "token": self.token,
            "sequence_id": self.sequence_id,
            "created_at_ms": self.created_at_ms,
            "single_use": self.single_use,
            "used": self.used,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TokenRecord":
        return cls(
            token=obj["token"],
            sequence_id=obj["sequence_id"],
            created_at_ms=obj["created_at_ms"],
            single_use=obj.get("single_use", True),
            used=obj.get("used", False),
        )


class SequenceStore:
    """sequence_id -> ScentSequence, persisted as sequences.json."""

    def __init__(self, data_dir=None):
        self.path = Path(data_dir) / "sequences.json" if data_dir else None
        self._sequences: dict[str, ScentSequence] = {}
        if self.path and self.path.exists():
            for seq_id, labels in json.loads(self.path.read_text(encoding="utf-8")).items():
                self._sequences[seq_id] = ScentSequence.from_labels(seq_id, labels)

    def register(self, sequence_id: str, labels) -> ScentSequence:
        sequence = ScentSequence.from_labels(sequence_id, labels)
        self._sequences[sequence_id] = sequence
        self._save()
        return sequence

    def get(self, sequence_id: str) -> ScentSequence:
        if sequence_id not in self._sequences:
            raise TokenError(f"unknown sequence {sequence_id!r}")
        return self._sequences[sequence_id]

    def __contains__(self, sequence_id: str) -> bool:
        return sequence_id in self._sequences

    def ids(self) -> list[str]:
        return sorted(self._sequences)

    def _save(self):
        if self.path:
            payload = {k: list(v.labels) for k, v in sorted(self._sequences.items())}
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


class TokenStore:
    """Thread-safe token registry, persisted as tokens.json."""

    def __init__(self, sequences: SequenceStore, data_dir=None):
        self.sequences = sequences
        self.path = Path(data_dir) / "tokens.json" if data_dir else None
        self._records: dict[str, TokenRecord] = {}
        self._lock = threading.Lock()
        if self.path and self.path.exists():
            for obj in json.loads(self.path.read_text(encoding="utf-8")):
                record = TokenRecord.from_json(obj)
                self._records[record.token] = record

    def create(self, sequence_id: str, *, single_use: bool = True) -> TokenRecord:
        self.sequences.get(sequence_id)  # raises on unknown sequence
        with self._lock:
            record = TokenRecord(
                token=secrets.token_urlsafe(16),
                sequence_id=sequence_id,
                created_at_ms=time.time_ns() // 1_000_000,
                single_use=single_use,
            )
            assert len(record.token) >= MIN_TOKEN_CHARS
            self._records[record.token] = record
            self._save()
            return record

    def resolve(self, token: str) -> ScentSequence:
        """Look up a token without consuming it."""
        record = self._records.get(token)
        if record is None:
            raise TokenError(f"unknown token {token!r}")
        if record.single_use and record.used:
            raise TokenError("token already used")
        return self.sequences.get(record.sequence_id)

    def consume(self, token: str) -> ScentSequence:
        """Resolve and burn a single-use token atomically."""
        with self._lock:
            sequence = self.resolve(token)
            record = self._records[token]
            if record.single_use:
                self._records[token] = replace(record, used=True)
                self._save()
            return sequence

    def _save(self):
        if self.path:
            payload = [r.to_json() for r in self._records.values()]
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def join_url(base: str, token: str) -> str:
    return f"{base.rstrip('/')}/join?t={token}"


def token_from_url(url: str) -> str:
    query = parse_qs(urlparse(url).query)
    tokens = query.get("t", [])
    if len(tokens) != 1:
        raise DomainError(f"no token in url {url!r}")
    return tokens[0]
