from .config import ServerConfig, load_config
from .tokens import SequenceStore, TokenRecord, TokenStore, join_url, token_from_url
from .persistence import QuarantineReport, SessionLogStore
from .sensing import LiveRoundResult, RoundSensor
from .service import (
    CLIENT_TYPES,
    PROTOCOL_VERSION,
    SERVER_TYPES,
    GameService,
    public_session_json,
    wire,
)
from .app import build_service, create_app, serve

__all__ = [
    "ServerConfig",
    "load_config",
    "SequenceStore",
    "TokenRecord",
    "TokenStore",
    "join_url",
    "token_from_url",
    "QuarantineReport",
    "SessionLogStore",
    "LiveRoundResult",
    "RoundSensor",
    "CLIENT_TYPES",
    "PROTOCOL_VERSION",
    "SERVER_TYPES",
    "GameService",
    "public_session_json",
    "wire",
    "build_service",
    "create_app",
    "serve",
]
