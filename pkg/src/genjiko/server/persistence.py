"""Write-ahead event logs: one JSONL file per session, replay on startup."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from ..errors import CorruptLogError
from ..session import ScentSequence, Session, SessionEvent, replay

logger = logging.getLogger(__name__)

LOG_SUFFIX = ".events.jsonl"
QUARANTINE_SUFFIX = ".events.jsonl.quarantined"


@dataclass
class QuarantineReport:
    session_id: str
    path: str
    reason: str


class SessionLogStore:
    def __init__(self, data_dir):
        self.sessions_dir = Path(data_dir) / "sessions"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)

    def path_for(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}{LOG_SUFFIX}"

    def append(self, session_id: str, event: SessionEvent):
        """Append one event and flush before anyone hears about it."""
        with self.path_for(session_id).open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event.to_json(), sort_keys=True) + "\n")
            fh.flush()

    def read_events(self, path: Path) -> list[SessionEvent]:
        events = []
        with path.open(encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    events.append(SessionEvent.from_json(json.loads(line)))
                except (ValueError, KeyError) as exc:
                    raise CorruptLogError(
                        f"{path.name} line {line_no}: {exc}", seq_no=line_no - 1
                    ) from exc
        return events

    def load_all(self) -> tuple[dict[str, Session], list[QuarantineReport]]:
        """Replay every session log; quarantine anything that will not fold."""
        sessions: dict[str, Session] = {}
        quarantined: list[QuarantineReport] = []
        for path in sorted(self.sessions_dir.glob(f"*{LOG_SUFFIX}")):
            session_id = path.name[: -len(LOG_SUFFIX)]
            try:
                events = self.read_events(path)
                registry = _registry_from_creation(events)
                session = replay(events, registry)
                if session.session_id != session_id:
                    raise CorruptLogError(
                        f"log {path.name} holds session {session.session_id}", seq_no=0
                    )
                sessions[session_id] = session
            except CorruptLogError as exc:
                target = path.with_suffix(path.suffix + ".quarantined")
                path.rename(target)
                logger.warning("quarantined %s: %s", path.name, exc)
                quarantined.append(
                    QuarantineReport(session_id=session_id, path=str(target), reason=str(exc))
                )
        return sessions, quarantined


def _registry_from_creation(events) -> dict[str, ScentSequence]:
    """The creation event embeds the sequence, so replay needs no registry."""
    if not events:
        raise CorruptLogError("empty event log", seq_no=0)
    payload = events[0].payload
    try:
        sequence = ScentSequence.from_labels(payload["sequence_id"], payload["labels"])
        return {payload["token"]: sequence}
    except Exception as exc:
        raise CorruptLogError(f"bad creation event: {exc}", seq_no=0) from exc
