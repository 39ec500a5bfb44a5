"""Glue that turns a session snapshot into one spoken turn."""

from __future__ import annotations

from importlib import resources

from ..session import Session
from .clients import StubClient, Utterance, generate
from .prompts import assemble_prompt, trend_summary
from .store import DynamicStore, StaticStore, load_docs_dir


def default_persona() -> str:
    return resources.files("genjiko.data").joinpath("persona.md").read_text(encoding="utf-8")


def default_static_store() -> StaticStore:
    knowledge = resources.files("genjiko.data").joinpath("knowledge")
    return StaticStore(load_docs_dir(knowledge))


class DialogueOrchestrator:
    """Mode-specific retrieval + prompt assembly + generation + recording."""

    def __init__(
        self,
        static_store: StaticStore | None = None,
        dynamic_store: DynamicStore | None = None,
        client=None,
        persona: str | None = None,
        retrieve_k: int = 3,
        budget: int = 4000,
    ):
        self.static_store = static_store or default_static_store()
        self.dynamic_store = dynamic_store or DynamicStore()
        self.client = client or StubClient()
        self.persona = persona if persona is not None else default_persona()
        self.retrieve_k = retrieve_k
        self.budget = budget

    def _query(self, mode: str, session: Session) -> str:
        """Retrieval keys on the mode plus this round's sensor-trend words."""
        from ..sensing.recording import CHANNELS

        parts = [mode, "incense", "scent"]
        r = session.current_round
        if r is not None:
            record = self.dynamic_store.round_record(session.session_id, r)
            if record is not None:
                parts.append(trend_summary(record.trend_slopes, CHANNELS))
        if mode == "debrief":
            parts.append("pattern comparison reflection")
        return " ".join(parts)

    def _speak(self, mode: str, session: Session) -> Utterance:
        r = session.current_round
        record = (
            self.dynamic_store.round_record(session.session_id, r) if r is not None else None
        )
        retrieved = self.static_store.retrieve(
            self._query(mode, session), mode, self.retrieve_k
        )
        aggregates = self.dynamic_store.aggregate(session.sequence.sequence_id)
        bundle = assemble_prompt(
            mode,
            session,
            retrieved,
            aggregates=aggregates,
            round_record=record,
            persona=self.persona,
            budget=self.budget,
        )
        return generate(self.client, bundle, self.dynamic_store, session.session_id)

    def briefing_utterance(self, session: Session) -> Utterance:
        return self._speak("briefing", session)

    def round_utterance(self, session: Session) -> Utterance:
        return self._speak("round", session)

    def debrief_utterance(self, session: Session) -> Utterance:
        return self._speak("debrief", session)
