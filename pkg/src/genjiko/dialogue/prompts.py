"""Prompt assembly: persona, retrieved snippets, and session facts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from ..errors import DomainError
from ..genjimon import Judgment
from ..session import (
    BRIEFING,
    DEBRIEF,
    ROUND_CONFIRM,
    ROUND_DIALOGUE,
    Session,
    build_reveal_report,
)
from .alignment import ai_match_judgment, compute_alignment
from .store import MODES, AggregateStats, DynamicRecord, KnowledgeDoc

TREND_THRESHOLD = 0.01  # units per second
AGGREGATE_FLOOR = 3  # sessions required before prior-player stats surface
DEFAULT_BUDGET = 4000

MODE_PHASES = {
    "briefing": (BRIEFING,),
    "round": (ROUND_DIALOGUE, ROUND_CONFIRM),
    "debrief": (DEBRIEF,),
}


@lru_cache(maxsize=1)
def class_names() -> tuple[str, ...]:
    with resources.files("genjiko.data").joinpath("class_names.json").open("rb") as fh:
        return tuple(json.load(fh))


def trend_word(slope: float) -> str:
    if slope >= TREND_THRESHOLD:
        return "rising"
    if slope <= -TREND_THRESHOLD:
        return "falling"
    return "flat"


def trend_summary(slopes, channels) -> str:
    """The three strongest-moving channels, described in words."""
    ranked = sorted(zip(channels, slopes), key=lambda cs: -abs(cs[1]))
    parts = [f"{name} {trend_word(slope)}" for name, slope in ranked[:3]]
    return ", ".join(parts)


def judgment_phrase(judgment_json) -> str:
    judgment = Judgment.from_json(judgment_json) if not isinstance(
        judgment_json, Judgment
    ) else judgment_json
    if judgment.is_new:
        return "a new scent"
    return f"a match with round {judgment.matches}"


@dataclass(frozen=True)
class Snippet:
    doc_id: str
    title: str
    text: str
    score: float


@dataclass(frozen=True)
class PromptBundle:
    mode: str
    persona: str
    snippets: tuple[Snippet, ...]  # ordered by retrieval score, descending
    facts: dict
    budget: int = DEFAULT_BUDGET

    def rendered(self) -> str:
        """System-prompt text, guaranteed to fit the length budget."""
        head = self.persona.strip()
        facts_text = "Session facts:\n" + json.dumps(self.facts, indent=1, sort_keys=True)
        fixed = f"{head}\n\n{facts_text}\n\nNotes:\n"
        remaining = self.budget - len(fixed)
        parts = []
        for snip in self.snippets:
            entry = f"- {snip.title}: {snip.text.strip()}\n"
            if len(entry) > remaining:
                entry = entry[: max(remaining - 2, 0)].rstrip()
                if entry:
                    parts.append(entry + "\n")
                break
            parts.append(entry)
            remaining -= len(entry)
        text = fixed + "".join(parts)
        return text[: self.budget]


def _round_facts(session: Session, round_record: DynamicRecord | None) -> dict:
    from ..sensing.recording import CHANNELS

    r = session.phase.number
    facts: dict = {"round": r}
    dist = session.ai_predictions[r - 1]
    if dist is not None:
        facts["vote_distribution"] = [f"{p:.2f}" for p in dist]
        facts["ai_top_class"] = class_names()[max(range(5), key=lambda i: dist[i])]
    if round_record is not None:
        facts["trends"] = trend_summary(round_record.trend_slopes, CHANNELS)
    if session.tentative is not None and dist is not None and all(
        session.ai_predictions[i] is not None for i in range(r)
    ):
        ai = ai_match_judgment(session.ai_predictions, r)
        alignment = compute_alignment(session.tentative, ai, session.confirmed_partition())
        facts["alignment"] = alignment.to_json()
        facts["human_judgment"] = session.tentative.to_json()
        facts["ai_judgment"] = ai.to_json()
    elif r == 1:
        facts["first_round"] = True
    return facts


def _debrief_facts(session: Session) -> dict:
    report = build_reveal_report(session)
    rounds = []
    for r in range(1, 6):
        dist = session.ai_predictions[r - 1]
        entry: dict = {"round": r}
        if dist is not None:
            entry["vote_distribution"] = [f"{p:.2f}" for p in dist]
            entry["ai_class"] = class_names()[max(range(5), key=lambda i: dist[i])]
        rounds.append(entry)
    return {
        "rounds": rounds,
        "player_pattern": report.player.key(),
        "truth_pattern": report.truth.key(),
        "pair_matches": report.score.pair_matches,
        "exact": report.score.exact,
    }


def assemble_prompt(
    mode: str,
    session: Session,
    retrieved,
    aggregates: AggregateStats | None = None,
    round_record: DynamicRecord | None = None,
    persona: str = "",
    budget: int = DEFAULT_BUDGET,
) -> PromptBundle:
    """Bundle everything one utterance needs, respecting the length budget
    and the privacy floor on cross-session aggregates."""
    if mode not in MODES:
        raise DomainError(f"unknown mode {mode!r}")
    if session.phase.kind not in MODE_PHASES[mode]:
        raise DomainError(
            f"mode {mode!r} is incompatible with phase {session.phase}"
        )
    if mode == "briefing":
        facts = {"rounds_ahead": 5, "calibration_samples": 5}
    elif mode == "round":
        facts = _round_facts(session, round_record)
    else:
        facts = _debrief_facts(session)
    if aggregates is not None and aggregates.session_count >= AGGREGATE_FLOOR:
        facts["prior_sessions"] = {
            "count": aggregates.session_count,
            "pair_fractions": {
                k: f"{v:.2f}" for k, v in (aggregates.pair_fractions or {}).items()
            },
        }
    snippets = tuple(
        Snippet(doc.doc_id, doc.title, doc.body.strip(), float(score))
        for doc, score in retrieved
    )
    return PromptBundle(
        mode=mode, persona=persona, snippets=snippets, facts=facts, budget=budget
    )
