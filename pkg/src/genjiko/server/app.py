"""HTTP + WebSocket front door over the game service."""

from __future__ import annotations

import logging
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from ..diagram import diagram_to_svg, render_pattern
from ..dialogue.clients import LiveClient, StubClient
from ..dialogue.orchestrator import DialogueOrchestrator, default_static_store
from ..dialogue.store import DynamicStore, StaticStore, load_docs_dir
from ..errors import GenjikoError, TokenError
from ..genjimon import enumerate_partitions
from ..model.artifact import load_model
from ..session import DEBRIEF, REVEAL, build_reveal_report
from .config import ServerConfig
from .persistence import SessionLogStore
from .service import GameService, public_session_json, wire
from .tokens import SequenceStore, TokenStore, join_url

logger = logging.getLogger(__name__)


def build_service(config: ServerConfig, *, require_model: bool = True, clock=None) -> GameService:
    data_dir = Path(config.data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)

    model = None
    if config.model_path:
        model_path = Path(config.model_path)
        if not model_path.exists():
            raise GenjikoError(
                f"model artifact {model_path} does not exist; train one with "
                f"'genjiko train' or point MODEL_PATH at an artifact"
            )
        model = load_model(model_path)
    elif require_model:
        raise GenjikoError(
            "no model_path configured; the co-smelling partner needs a model "
            "artifact (set model_path in the config or MODEL_PATH in the environment)"
        )

    sequences = SequenceStore(data_dir)
    for sequence_id, labels in config.sequences.items():
        sequences.register(sequence_id, labels)
    tokens = TokenStore(sequences, data_dir)

    if config.knowledge_dir:
        static_store = StaticStore(load_docs_dir(config.knowledge_dir))
    else:
        static_store = default_static_store()
    persona = None
    if config.persona_path:
        persona = Path(config.persona_path).read_text(encoding="utf-8")
    client = (
        LiveClient(config.llm_endpoint, config.llm_model)
        if config.llm_mode == "live"
        else StubClient()
    )
    orchestrator = DialogueOrchestrator(
        static_store=static_store,
        dynamic_store=DynamicStore(data_dir),
        client=client,
        persona=persona,
    )
    service = GameService(
        config,
        sequence_store=sequences,
        token_store=tokens,
        log_store=SessionLogStore(data_dir),
        orchestrator=orchestrator,
        model=model,
        clock=clock,
    )
    service.recover()
    return service


def create_app(config: ServerConfig, *, service: GameService | None = None) -> FastAPI:
    app = FastAPI(title="genjiko session server")
    if service is None:
        service = build_service(config)
    app.state.service = service

    @app.exception_handler(GenjikoError)
    async def domain_error(_, exc: GenjikoError):
        status = 404 if isinstance(exc, TokenError) else 400
        return JSONResponse(status_code=status, content={"error": str(exc)})

    @app.post("/api/tokens")
    async def create_token(body: dict):
        sequence_id = body.get("sequence_id")
        if not sequence_id:
            raise TokenError("body must carry a sequence_id")
        record = service.tokens.create(sequence_id, single_use=body.get("single_use", True))
        return {
            **record.to_json(),
            "join_url": join_url(f"http://localhost:{config.port}", record.token),
        }

    @app.post("/api/sessions")
    async def create_session(body: dict):
        token = body.get("token", "")
        session = await service.create_session(token)
        return public_session_json(session)

    @app.get("/api/sessions/{session_id}")
    async def get_session(session_id: str):
        handle = service.get_handle(session_id)
        return public_session_json(handle.session)

    @app.get("/api/patterns")
    async def patterns():
        entries = []
        for partition in enumerate_partitions(5):
            diagram = render_pattern(partition)
            entries.append({
                "rgs": partition.key(),
                "diagram": diagram.to_json(),
                "svg": diagram_to_svg(diagram),
            })
        return {"patterns": entries}

    @app.get("/api/sessions/{session_id}/bookmark.svg")
    async def bookmark(session_id: str):
        handle = service.get_handle(session_id)
        session = handle.session
        if session.phase.kind not in (REVEAL, DEBRIEF, "closed"):
            raise HTTPException(
                status_code=409,
                detail=f"bookmark is available after the reveal; phase is {session.phase}",
            )
        report = build_reveal_report(session)
        svg = diagram_to_svg(report.player_diagram)
        return Response(content=svg, media_type="image/svg+xml")

    @app.get("/api/health")
    async def health():
        return {
            "status": "ok",
            "sessions": len(service.sessions),
            "sequences": service.sequences.ids(),
            "quarantined": [
                {"session_id": q.session_id, "path": q.path, "reason": q.reason}
                for q in service.quarantined
            ],
        }

    @app.websocket("/ws/{session_id}")
    async def ws_endpoint(websocket: WebSocket, session_id: str):
        await websocket.accept()
        try:
            service.get_handle(session_id)
        except TokenError as exc:
            await websocket.send_json(
                wire("error", session_id, -1, {"message": str(exc), "phase": "", "action": ""})
            )
            await websocket.close()
            return

        async def sink(message: dict):
            await websocket.send_json(message)

        snapshot = await service.connect(session_id, sink)
        await websocket.send_json(snapshot)
        try:
            while True:
                try:
                    message = await websocket.receive_json()
                except ValueError:
                    handle = service.get_handle(session_id)
                    await websocket.send_json(
                        wire("error", session_id, len(handle.session.events) - 1,
                             {"message": "malformed JSON", "phase": str(handle.session.phase),
                              "action": ""})
                    )
                    continue
                await service.handle_message(session_id, message, origin_sink=sink)
        except WebSocketDisconnect:
            pass
        finally:
            await service.disconnect(session_id, sink)

    if config.static_dir:
        app.mount("/app", StaticFiles(directory=config.static_dir, html=True), name="app")

    return app


def serve(config: ServerConfig):
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host="0.0.0.0", port=config.port, log_level="info")
