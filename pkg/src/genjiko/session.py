"""Turn-based game session: phases, judgments, events, and replay.

A session is an immutable snapshot; every operation returns a new session
with exactly one event appended.  The event log is the source of truth:
``replay`` folds a log back into the identical session, so persistence and
crash recovery reduce to appending JSON lines.

Phase progression::

    briefing -> calibration(1..5) -> round_smelling(1)
    round 1:      smelling -> dialogue -> smelling(2)
    rounds 2..5:  smelling -> judgment -> dialogue [-> confirm] -> next
    after round 5's confirm: reveal -> debrief -> closed

Round 1 establishes the reference scent and never carries a judgment, so
its judgment phase does not exist and its dialogue leads straight to round
2.  Confirming is legal from the dialogue phase as well as the confirm
phase; the confirm phase exists so a client can park on a decision screen
after the dialogue.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, replace
from typing import Mapping

from .diagram import PatternDiagram, render_pattern
from .errors import CorruptLogError, DomainError, ProtocolError, TokenError
from .genjimon import (
    MAX_ROUNDS,
    AgreementScore,
    Judgment,
    Partition,
    apply_judgment,
    compare_patterns,
    fold_judgments,
)

N_CLASSES = 5

CALIBRATION_SAMPLES = 5

# phase kinds
BRIEFING = "briefing"
CALIBRATION = "calibration"
ROUND_SMELLING = "round_smelling"
ROUND_JUDGMENT = "round_judgment"
ROUND_DIALOGUE = "round_dialogue"
ROUND_CONFIRM = "round_confirm"
REVEAL = "reveal"
DEBRIEF = "debrief"
CLOSED = "closed"

# actions accepted by advance()
START_CALIBRATION = "start_calibration"
CALIBRATION_NEXT = "calibration_next"
FINISH_CALIBRATION = "finish_calibration"
DONE_SMELLING = "done_smelling"
FINISH_DIALOGUE = "finish_dialogue"
CLOSE = "close"

ADVANCE_ACTIONS = (
    START_CALIBRATION,
    CALIBRATION_NEXT,
    FINISH_CALIBRATION,
    DONE_SMELLING,
    FINISH_DIALOGUE,
    CLOSE,
)

# event kinds
EV_CREATED = "session_created"
EV_PHASE = "phase_advanced"
EV_PROPOSED = "judgment_proposed"
EV_REVISED = "judgment_revised"
EV_CONFIRMED = "judgment_confirmed"
EV_AI_PREDICTION = "ai_prediction_recorded"
EV_UTTERANCE = "utterance_emitted"
EV_REVEALED = "revealed"


@dataclass(frozen=True)
class Phase:
    kind: str
    number: int | None = None

    def __str__(self) -> str:
        return self.kind if self.number is None else f"{self.kind}({self.number})"

    def to_json(self) -> dict:
        payload = {"kind": self.kind}
        if self.number is not None:
            key = "sample" if self.kind == CALIBRATION else "round"
            payload[key] = self.number
        return payload

    @classmethod
    def from_json(cls, payload: dict) -> "Phase":
        return cls(payload["kind"], payload.get("sample", payload.get("round")))


@dataclass(frozen=True)
class ScentSequence:
    """Five scheduled scents and the partition their labels induce."""

    sequence_id: str
    labels: tuple[int, ...]
    truth: Partition

    def __post_init__(self):
        if len(self.labels) != MAX_ROUNDS:
            raise DomainError(f"a sequence schedules {MAX_ROUNDS} scents, got {len(self.labels)}")
        for label in self.labels:
            if not 0 <= label < N_CLASSES:
                raise DomainError(f"scent class labels are 0..{N_CLASSES - 1}, got {label}")

    @classmethod
    def from_labels(cls, sequence_id: str, labels) -> "ScentSequence":
        labels = tuple(int(v) for v in labels)
        return cls(sequence_id, labels, Partition.from_labels(labels))


@dataclass(frozen=True)
class SessionEvent:
    seq_no: int
    t_ms: int
    kind: str
    payload: dict

    def to_json(self) -> dict:
        return {"seq_no": self.seq_no, "t_ms": self.t_ms, "kind": self.kind, "payload": self.payload}

    @classmethod
    def from_json(cls, obj: dict) -> "SessionEvent":
        return cls(obj["seq_no"], obj["t_ms"], obj["kind"], obj["payload"])


@dataclass(frozen=True)
class Session:
    session_id: str
    token: str
    sequence: ScentSequence
    phase: Phase
    tentative: Judgment | None
    confirmed: tuple[Judgment, ...]
    ai_predictions: tuple[tuple[float, ...] | None, ...]  # index r-1
    utterances: tuple[dict, ...]
    events: tuple[SessionEvent, ...]
    created_at_ms: int

    @property
    def current_round(self) -> int | None:
        if self.phase.kind in (ROUND_SMELLING, ROUND_JUDGMENT, ROUND_DIALOGUE, ROUND_CONFIRM):
            return self.phase.number
        return None

    def confirmed_partition(self) -> Partition:
        """Partition over round 1 plus every confirmed round."""
        return fold_judgments(self.confirmed)


@dataclass(frozen=True)
class RevealReport:
    player: Partition
    truth: Partition
    player_diagram: PatternDiagram
    truth_diagram: PatternDiagram
    score: AgreementScore

    def pair_detail(self) -> list[dict]:
        detail = []
        for i in range(1, MAX_ROUNDS + 1):
            for j in range(i + 1, MAX_ROUNDS + 1):
                ps = self.player.same_group(i, j)
                ts = self.truth.same_group(i, j)
                detail.append({"i": i, "j": j, "player_same": ps, "truth_same": ts, "agree": ps == ts})
        return detail

    def to_json(self) -> dict:
        return {
            "player_rgs": self.player.key(),
            "truth_rgs": self.truth.key(),
            "player_diagram": self.player_diagram.to_json(),
            "truth_diagram": self.truth_diagram.to_json(),
            "score": self.score.to_json(),
            "pairs": self.pair_detail(),
        }


def _emit(session: Session, kind: str, payload: dict, at_ms: int, **changes) -> Session:
    event = SessionEvent(seq_no=len(session.events), t_ms=at_ms, kind=kind, payload=payload)
    return replace(session, events=session.events + (event,), **changes)


def _illegal(session: Session, action: str, why: str | None = None) -> ProtocolError:
    msg = f"action '{action}' is not legal in phase {session.phase}"
    if why:
        msg += f": {why}"
    return ProtocolError(msg, phase=str(session.phase), action=action)


def create_session(
    token: str,
    registry: Mapping[str, ScentSequence],
    *,
    session_id: str | None = None,
    at_ms: int = 0,
) -> Session:
    if token not in registry:
        raise TokenError(f"unknown token: {token!r}")
    sequence = registry[token]
    session_id = session_id or uuid.uuid4().hex
    session = Session(
        session_id=session_id,
        token=token,
        sequence=sequence,
        phase=Phase(BRIEFING),
        tentative=None,
        confirmed=(),
        ai_predictions=(None,) * MAX_ROUNDS,
        utterances=(),
        events=(),
        created_at_ms=at_ms,
    )
    payload = {
        "session_id": session_id,
        "token": token,
        "sequence_id": sequence.sequence_id,
        "labels": list(sequence.labels),
    }
    return _emit(session, EV_CREATED, payload, at_ms)


def advance(session: Session, action: str, *, at_ms: int = 0) -> Session:
    """Apply one unparameterized action; illegal actions change nothing."""
    phase = session.phase
    if action == START_CALIBRATION:
        if phase.kind != BRIEFING:
            raise _illegal(session, action)
        new_phase = Phase(CALIBRATION, 1)
    elif action == CALIBRATION_NEXT:
        if phase.kind != CALIBRATION or phase.number >= CALIBRATION_SAMPLES:
            raise _illegal(session, action)
        new_phase = Phase(CALIBRATION, phase.number + 1)
    elif action == FINISH_CALIBRATION:
        if phase.kind != CALIBRATION or phase.number != CALIBRATION_SAMPLES:
            raise _illegal(session, action)
        new_phase = Phase(ROUND_SMELLING, 1)
    elif action == DONE_SMELLING:
        if phase.kind != ROUND_SMELLING:
            raise _illegal(session, action)
        r = phase.number
        new_phase = Phase(ROUND_DIALOGUE, 1) if r == 1 else Phase(ROUND_JUDGMENT, r)
    elif action == FINISH_DIALOGUE:
        if phase.kind != ROUND_DIALOGUE:
            raise _illegal(session, action)
        r = phase.number
        new_phase = Phase(ROUND_SMELLING, 2) if r == 1 else Phase(ROUND_CONFIRM, r)
    elif action == CLOSE:
        if phase.kind != DEBRIEF:
            raise _illegal(session, action)
        new_phase = Phase(CLOSED)
    else:
        raise _illegal(session, action, "unknown action")
    payload = {"action": action, "phase": new_phase.to_json()}
    return _emit(session, EV_PHASE, payload, at_ms, phase=new_phase)


def propose_judgment(session: Session, judgment: Judgment, *, at_ms: int = 0) -> Session:
    phase = session.phase
    if phase.kind != ROUND_JUDGMENT:
        raise _illegal(session, "propose_judgment")
    _check_judgment(session, judgment, phase.number)
    payload = {"round": phase.number, "judgment": judgment.to_json()}
    return _emit(
        session, EV_PROPOSED, payload, at_ms,
        tentative=judgment, phase=Phase(ROUND_DIALOGUE, phase.number),
    )


def revise_judgment(session: Session, judgment: Judgment, *, at_ms: int = 0) -> Session:
    phase = session.phase
    if phase.kind not in (ROUND_DIALOGUE, ROUND_CONFIRM) or session.tentative is None:
        raise _illegal(session, "revise_judgment", "no tentative judgment to revise")
    _check_judgment(session, judgment, phase.number)
    payload = {"round": phase.number, "judgment": judgment.to_json()}
    return _emit(session, EV_REVISED, payload, at_ms, tentative=judgment)


def confirm_judgment(session: Session, *, at_ms: int = 0) -> Session:
    phase = session.phase
    if phase.kind not in (ROUND_DIALOGUE, ROUND_CONFIRM) or session.tentative is None:
        raise _illegal(session, "confirm_judgment", "nothing tentative to confirm")
    r = phase.number
    new_phase = Phase(REVEAL) if r == MAX_ROUNDS else Phase(ROUND_SMELLING, r + 1)
    payload = {"round": r, "judgment": session.tentative.to_json(), "phase": new_phase.to_json()}
    return _emit(
        session, EV_CONFIRMED, payload, at_ms,
        confirmed=session.confirmed + (session.tentative,),
        tentative=None,
        phase=new_phase,
    )


def record_ai_prediction(
    session: Session,
    round_no: int,
    distribution,
    *,
    low_confidence: bool = False,
    at_ms: int = 0,
) -> Session:
    phase = session.phase
    if phase.kind != ROUND_SMELLING or phase.number != round_no:
        raise _illegal(session, "record_ai_prediction", f"round {round_no} is not being smelled")
    if session.ai_predictions[round_no - 1] is not None:
        raise _illegal(session, "record_ai_prediction", f"round {round_no} already recorded")
    dist = tuple(float(p) for p in distribution)
    if len(dist) != N_CLASSES or any(p < 0 for p in dist) or abs(sum(dist) - 1.0) > 1e-6:
        raise DomainError(f"not a class distribution: {dist}")
    preds = list(session.ai_predictions)
    preds[round_no - 1] = dist
    payload = {"round": round_no, "distribution": list(dist), "low_confidence": low_confidence}
    return _emit(session, EV_AI_PREDICTION, payload, at_ms, ai_predictions=tuple(preds))


UTTERANCE_PHASES = (BRIEFING, ROUND_DIALOGUE, ROUND_CONFIRM, DEBRIEF)


def record_utterance(session: Session, utterance: dict, *, at_ms: int = 0) -> Session:
    if session.phase.kind not in UTTERANCE_PHASES:
        raise _illegal(session, "record_utterance")
    utterance = dict(utterance)
    return _emit(
        session, EV_UTTERANCE, utterance, at_ms,
        utterances=session.utterances + (utterance,),
    )


def current_genjimon(session: Session) -> PatternDiagram:
    """Diagram over round 1 plus the confirmed rounds so far."""
    if session.phase.kind in (BRIEFING, CALIBRATION):
        raise ProtocolError(
            f"no rounds smelled yet in phase {session.phase}",
            phase=str(session.phase), action="current_genjimon",
        )
    return render_pattern(session.confirmed_partition())


def build_reveal_report(session: Session) -> RevealReport:
    player = session.confirmed_partition()
    if player.n != MAX_ROUNDS:
        raise ProtocolError(
            f"only {player.n} rounds decided; reveal needs all {MAX_ROUNDS}",
            phase=str(session.phase), action="reveal",
        )
    truth = session.sequence.truth
    return RevealReport(
        player=player,
        truth=truth,
        player_diagram=render_pattern(player),
        truth_diagram=render_pattern(truth),
        score=compare_patterns(player, truth),
    )


def reveal(session: Session, *, at_ms: int = 0) -> tuple[Session, RevealReport]:
    if session.phase.kind != REVEAL:
        raise _illegal(session, "reveal")
    report = build_reveal_report(session)
    payload = {
        "player": report.player.key(),
        "truth": report.truth.key(),
        "pair_matches": report.score.pair_matches,
        "exact": report.score.exact,
        "phase": Phase(DEBRIEF).to_json(),
    }
    return _emit(session, EV_REVEALED, payload, at_ms, phase=Phase(DEBRIEF)), report


def _check_judgment(session: Session, judgment: Judgment, round_no: int):
    if not isinstance(judgment, Judgment):
        raise DomainError(f"not a judgment: {judgment!r}")
    prefix = fold_judgments(session.confirmed)
    if prefix.n != round_no - 1:
        raise _illegal(
            session, "judgment",
            f"round {round_no} judged but only {prefix.n} rounds are settled",
        )
    apply_judgment(prefix, judgment)  # raises InvalidJudgmentError on a bad target


def replay(events, registry: Mapping[str, ScentSequence]) -> Session:
    """Fold an event log back into the session that produced it.

    Every event is re-driven through the live operations, so replay fails
    loudly (with the offending seq_no) on gaps, illegal transitions, or
    payloads that no longer reproduce the logged event.
    """
    events = list(events)
    if not events:
        raise CorruptLogError("empty event log", seq_no=0)
    session: Session | None = None
    for expect, event in enumerate(events):
        if event.seq_no != expect:
            raise CorruptLogError(
                f"expected seq_no {expect}, found {event.seq_no}", seq_no=event.seq_no
            )
        try:
            session = _apply_event(session, event, registry)
        except CorruptLogError:
            raise
        except Exception as exc:
            raise CorruptLogError(str(exc), seq_no=event.seq_no) from exc
        produced = session.events[-1]
        if produced != event:
            raise CorruptLogError(
                f"replayed event diverges from log: {produced.kind} != {event.kind}",
                seq_no=event.seq_no,
            )
    return session


def _apply_event(session: Session | None, event: SessionEvent, registry) -> Session:
    kind, payload, at = event.kind, event.payload, event.t_ms
    if kind == EV_CREATED:
        if session is not None:
            raise CorruptLogError("second creation event", seq_no=event.seq_no)
        return create_session(
            payload["token"], registry, session_id=payload["session_id"], at_ms=at
        )
    if session is None:
        raise CorruptLogError("log does not start with creation", seq_no=event.seq_no)
    if kind == EV_PHASE:
        return advance(session, payload["action"], at_ms=at)
    if kind == EV_PROPOSED:
        return propose_judgment(session, Judgment.from_json(payload["judgment"]), at_ms=at)
    if kind == EV_REVISED:
        return revise_judgment(session, Judgment.from_json(payload["judgment"]), at_ms=at)
    if kind == EV_CONFIRMED:
        return confirm_judgment(session, at_ms=at)
    if kind == EV_AI_PREDICTION:
        return record_ai_prediction(
            session, payload["round"], payload["distribution"],
            low_confidence=payload["low_confidence"], at_ms=at,
        )
    if kind == EV_UTTERANCE:
        return record_utterance(session, payload, at_ms=at)
    if kind == EV_REVEALED:
        new_session, _ = reveal(session, at_ms=at)
        return new_session
    raise CorruptLogError(f"unknown event kind {kind!r}", seq_no=event.seq_no)
