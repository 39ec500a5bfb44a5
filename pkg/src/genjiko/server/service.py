"""The game coordinator: one logical writer per session.

Every client message (and the sensing loop's round close) funnels through
``handle_message`` under the session's lock.  State changes append to the
write-ahead event log before any broadcast leaves the building, so a
crash can lose at most messages that nobody heard.  The FastAPI layer and
the headless simulator both drive this service; neither owns game logic.
"""

from __future__ import annotations

import asyncio
import logging
import time
import zlib
from dataclasses import dataclass, field, replace as dc_replace

from ..dialogue.alignment import ai_match_judgment
from ..dialogue.orchestrator import DialogueOrchestrator
from ..dialogue.store import DynamicRecord
from ..errors import GenjikoError, ProtocolError, TokenError
from ..genjimon import Judgment
from ..model.models import ScentModel
from ..sensing.recording import parse_recording
from ..sensing.stream import FrameStream
from ..sensing.synth import synth_recording
from ..session import (
    CALIBRATION,
    CALIBRATION_NEXT,
    CLOSE,
    DEBRIEF,
    DONE_SMELLING,
    FINISH_CALIBRATION,
    FINISH_DIALOGUE,
    REVEAL,
    ROUND_CONFIRM,
    ROUND_DIALOGUE,
    ROUND_SMELLING,
    START_CALIBRATION,
    EV_REVEALED,
    EV_UTTERANCE,
    Session,
    advance,
    build_reveal_report,
    confirm_judgment,
    create_session,
    current_genjimon,
    propose_judgment,
    record_ai_prediction,
    record_utterance,
    reveal,
    revise_judgment,
)
from .config import ServerConfig
from .persistence import QuarantineReport, SessionLogStore
from .sensing import LiveRoundResult, RoundSensor
from .tokens import SequenceStore, TokenStore

logger = logging.getLogger(__name__)

PROTOCOL_VERSION = 1

CLIENT_TYPES = (
    "start_calibration",
    "calibration_next",
    "done_smelling",
    "propose_judgment",
    "revise_judgment",
    "confirm_judgment",
    "request_dialogue",
    "acknowledge_reveal",
)

SERVER_TYPES = ("phase", "genjimon", "prediction_update", "utterance", "reveal", "error")


@dataclass
class SessionHandle:
    session: Session
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)
    sinks: list = field(default_factory=list)
    sensor: RoundSensor | None = None
    sensor_task: asyncio.Task | None = None


def wire(msg_type: str, session_id: str, seq_no: int, payload: dict) -> dict:
    return {
        "v": PROTOCOL_VERSION,
        "type": msg_type,
        "session_id": session_id,
        "seq_no": seq_no,
        "payload": payload,
    }


def public_session_json(session: Session) -> dict:
    data = {
        "session_id": session.session_id,
        "phase": session.phase.to_json(),
        "tentative": session.tentative.to_json() if session.tentative else None,
        "confirmed": [j.to_json() for j in session.confirmed],
        "ai_predictions": [
            list(d) if d is not None else None for d in session.ai_predictions
        ],
        "utterances": list(session.utterances),
        "seq_no": len(session.events) - 1,
    }
    if session.phase.kind not in ("briefing", CALIBRATION):
        data["genjimon"] = current_genjimon(session).to_json()
        data["player_rgs"] = session.confirmed_partition().key()
    if session.phase.kind in (DEBRIEF, "closed"):
        data["reveal"] = build_reveal_report(session).to_json()
    return data


class GameService:
    def __init__(
        self,
        config: ServerConfig,
        *,
        sequence_store: SequenceStore,
        token_store: TokenStore,
        log_store: SessionLogStore,
        orchestrator: DialogueOrchestrator,
        model: ScentModel | None = None,
        clock=None,
    ):
        self.config = config
        self.sequences = sequence_store
        self.tokens = token_store
        self.log_store = log_store
        self.orchestrator = orchestrator
        self.model = model
        self.clock = clock or (lambda: time.time_ns() // 1_000_000)
        self.sessions: dict[str, SessionHandle] = {}
        self.quarantined: list[QuarantineReport] = []

    # lifecycle ---------------------------------------------------------
    def recover(self):
        sessions, self.quarantined = self.log_store.load_all()
        for session_id, session in sessions.items():
            self.sessions[session_id] = SessionHandle(session=session)
        if sessions:
            logger.info("recovered %d session(s) from event logs", len(sessions))

    async def create_session(self, token: str) -> Session:
        sequence = self.tokens.consume(token)
        session = create_session(token, {token: sequence}, at_ms=self.clock())
        utterance = self.orchestrator.briefing_utterance(session)
        session = record_utterance(session, utterance.to_json(), at_ms=self.clock())
        handle = SessionHandle(session=session)
        for event in session.events:
            self.log_store.append(session.session_id, event)
        self.sessions[session.session_id] = handle
        return session

    def get_handle(self, session_id: str) -> SessionHandle:
        handle = self.sessions.get(session_id)
        if handle is None:
            raise TokenError(f"unknown session {session_id!r}")
        return handle

    # connections -------------------------------------------------------
    async def connect(self, session_id: str, sink) -> dict:
        handle = self.get_handle(session_id)
        async with handle.lock:
            handle.sinks.append(sink)
            self._ensure_sensing(handle)
            session = handle.session
            return wire("phase", session_id, len(session.events) - 1,
                        public_session_json(session))

    async def disconnect(self, session_id: str, sink):
        handle = self.sessions.get(session_id)
        if handle and sink in handle.sinks:
            handle.sinks.remove(sink)

    # messages ----------------------------------------------------------
    async def handle_message(self, session_id: str, message: dict, origin_sink=None):
        handle = self.get_handle(session_id)
        msg_type = message.get("type")
        payload = message.get("payload") or {}
        version = message.get("v", PROTOCOL_VERSION)
        async with handle.lock:
            try:
                if version != PROTOCOL_VERSION:
                    raise ProtocolError(
                        f"unsupported protocol version {version!r}",
                        phase=str(handle.session.phase), action=str(msg_type),
                    )
                if msg_type not in CLIENT_TYPES:
                    raise ProtocolError(
                        f"unknown message type {msg_type!r}",
                        phase=str(handle.session.phase), action=str(msg_type),
                    )
                await self._dispatch(handle, msg_type, payload)
            except GenjikoError as exc:
                await self._send_error(handle, origin_sink, exc, msg_type)

    async def _dispatch(self, handle: SessionHandle, msg_type: str, payload: dict):
        session = handle.session
        now = self.clock()
        if msg_type == "start_calibration":
            await self._commit(handle, advance(session, START_CALIBRATION, at_ms=now))
        elif msg_type == "calibration_next":
            action = (
                FINISH_CALIBRATION
                if session.phase.kind == CALIBRATION and session.phase.number == 5
                else CALIBRATION_NEXT
            )
            await self._commit(handle, advance(session, action, at_ms=now))
            self._ensure_sensing(handle)
        elif msg_type == "done_smelling":
            await self._handle_done_smelling(handle)
        elif msg_type == "propose_judgment":
            judgment = Judgment.from_json(payload.get("judgment"))
            updated = propose_judgment(session, judgment, at_ms=now)
            updated = self._with_round_utterance(updated)
            await self._commit(handle, updated)
        elif msg_type == "revise_judgment":
            judgment = Judgment.from_json(payload.get("judgment"))
            await self._commit(handle, revise_judgment(session, judgment, at_ms=now))
        elif msg_type == "confirm_judgment":
            updated = confirm_judgment(session, at_ms=now)
            self._update_round_record(updated)
            await self._commit(handle, updated)
            self._ensure_sensing(handle)
        elif msg_type == "request_dialogue":
            if session.phase.kind == ROUND_DIALOGUE and session.phase.number >= 2:
                updated = advance(session, FINISH_DIALOGUE, at_ms=now)
                updated = self._with_round_utterance(updated)
                await self._commit(handle, updated)
            elif session.phase.kind == ROUND_CONFIRM:
                await self._commit(handle, self._with_round_utterance(session))
            else:
                raise ProtocolError(
                    f"request_dialogue is not legal in phase {session.phase}",
                    phase=str(session.phase), action="request_dialogue",
                )
        elif msg_type == "acknowledge_reveal":
            if session.phase.kind == REVEAL:
                revealed, _report = reveal(session, at_ms=now)
                self.orchestrator.dynamic_store.complete_session(
                    revealed.session_id,
                    revealed.sequence.sequence_id,
                    revealed.confirmed_partition().key(),
                )
                utterance = self.orchestrator.debrief_utterance(revealed)
                revealed = record_utterance(revealed, utterance.to_json(), at_ms=self.clock())
                await self._commit(handle, revealed)
            else:
                await self._commit(handle, advance(session, CLOSE, at_ms=now))

    async def _handle_done_smelling(self, handle: SessionHandle):
        session = handle.session
        if session.phase.kind != ROUND_SMELLING:
            raise ProtocolError(
                f"action 'done_smelling' is not legal in phase {session.phase}",
                phase=str(session.phase), action="done_smelling",
            )
        round_no = session.phase.number
        result = await self._stop_sensing(handle)
        updated = record_ai_prediction(
            session, round_no, result.distribution,
            low_confidence=result.low_confidence, at_ms=self.clock(),
        )
        ai_judgment = None
        if round_no >= 2:
            ai_judgment = ai_match_judgment(updated.ai_predictions, round_no).to_json()
        self.orchestrator.dynamic_store.record_round(
            DynamicRecord(
                session_id=updated.session_id,
                round=round_no,
                trend_slopes=result.trend_slopes,
                prediction=result.distribution,
                human_judgment=None,
                ai_judgment=ai_judgment,
                low_confidence=result.low_confidence,
            )
        )
        updated = advance(updated, DONE_SMELLING, at_ms=self.clock())
        if round_no == 1:
            # round 1 has nothing to confirm: speak and move on
            utterance = self.orchestrator.round_utterance(updated)
            updated = record_utterance(updated, utterance.to_json(), at_ms=self.clock())
            updated = advance(updated, FINISH_DIALOGUE, at_ms=self.clock())
        await self._commit(handle, updated)
        self._ensure_sensing(handle)

    def _with_round_utterance(self, session: Session) -> Session:
        utterance = self.orchestrator.round_utterance(session)
        return record_utterance(session, utterance.to_json(), at_ms=self.clock())

    def _update_round_record(self, session: Session):
        """After a confirm, fill the human judgment into the round record."""
        round_no = len(session.confirmed) + 1  # the round just confirmed
        record = self.orchestrator.dynamic_store.round_record(session.session_id, round_no)
        if record is not None and round_no >= 2:
            self.orchestrator.dynamic_store.record_round(
                dc_replace(record, human_judgment=session.confirmed[-1].to_json())
            )

    # sensing -----------------------------------------------------------
    def _round_recording(self, handle: SessionHandle, round_no: int):
        sequence = handle.session.sequence
        label = sequence.labels[round_no - 1]
        if self.config.sensing_mode == "synth":
            seed = zlib.crc32(f"{handle.session.session_id}:{round_no}".encode())
            return synth_recording(
                label,
                seed=seed,
                duration_s=self.config.sensing_duration_s,
                noise_sigma=self.config.sensing_noise_sigma,
                recording_id=f"live-{handle.session.session_id[:8]}-r{round_no}",
            )
        base = self.log_store.sessions_dir.parent / "sensing" / sequence.sequence_id
        csv_path = base / f"round{round_no}.csv"
        meta_path = base / f"round{round_no}.meta.json"
        if not csv_path.exists() or not meta_path.exists():
            logger.warning("no sensing file for %s round %d", sequence.sequence_id, round_no)
            return None
        return parse_recording(csv_path.read_bytes(), meta_path.read_bytes())

    def _ensure_sensing(self, handle: SessionHandle):
        session = handle.session
        if (
            self.model is None
            or session.phase.kind != ROUND_SMELLING
            or handle.sensor_task is not None
        ):
            return
        recording = self._round_recording(handle, session.phase.number)
        if recording is None:
            return
        sensor = RoundSensor(self.model)
        stream = FrameStream(recording, self.config.sensing_speedup)
        round_no = session.phase.number

        async def on_window(index, prediction, state):
            message = wire(
                "prediction_update",
                session.session_id,
                len(handle.session.events) - 1,
                {
                    "round": round_no,
                    "window": index,
                    "probs": list(prediction.probs),
                    "vote_counts": list(state.counts),
                    "total": state.total,
                },
            )
            await self._fan_out(handle, message)

        handle.sensor = sensor
        handle.sensor_task = asyncio.create_task(sensor.consume(stream, on_window))

    async def _stop_sensing(self, handle: SessionHandle) -> LiveRoundResult:
        sensor, task = handle.sensor, handle.sensor_task
        handle.sensor, handle.sensor_task = None, None
        if sensor is None:
            return LiveRoundResult(
                distribution=(0.2,) * 5, low_confidence=True,
                trend_slopes=(0.0,) * 9, n_windows=0,
            )
        if task is not None and not task.done():
            task.cancel()
        if task is not None:
            try:
                await task
            except asyncio.CancelledError:
                pass
        return sensor.result()

    # persistence + fan-out ----------------------------------------------
    async def _commit(self, handle: SessionHandle, new_session: Session):
        """Write-ahead: log every new event, then swap state, then broadcast."""
        old = handle.session
        new_events = new_session.events[len(old.events):]
        for event in new_events:
            self.log_store.append(new_session.session_id, event)
        handle.session = new_session
        session_id = new_session.session_id
        seq_no = len(new_session.events) - 1
        await self._fan_out(
            handle, wire("phase", session_id, seq_no, public_session_json(new_session))
        )
        if new_session.phase.kind not in ("briefing", CALIBRATION):
            await self._fan_out(
                handle,
                wire("genjimon", session_id, seq_no, {
                    "rgs": new_session.confirmed_partition().key(),
                    "diagram": current_genjimon(new_session).to_json(),
                }),
            )
        for event in new_events:
            if event.kind == EV_UTTERANCE:
                await self._fan_out(
                    handle, wire("utterance", session_id, event.seq_no, event.payload)
                )
            elif event.kind == EV_REVEALED:
                await self._fan_out(
                    handle,
                    wire("reveal", session_id, event.seq_no,
                         build_reveal_report(new_session).to_json()),
                )

    async def _fan_out(self, handle: SessionHandle, message: dict):
        dead = []
        for sink in list(handle.sinks):
            try:
                await sink(message)
            except Exception:
                dead.append(sink)
        for sink in dead:
            if sink in handle.sinks:
                handle.sinks.remove(sink)

    async def _send_error(self, handle: SessionHandle, origin_sink, exc, msg_type):
        payload = {
            "message": str(exc),
            "phase": getattr(exc, "phase", str(handle.session.phase)),
            "action": getattr(exc, "action", msg_type) or msg_type,
        }
        message = wire(
            "error", handle.session.session_id, len(handle.session.events) - 1, payload
        )
        if origin_sink is not None:
            try:
                await origin_sink(message)
            except Exception:
                pass
        else:
            await self._fan_out(handle, message)
