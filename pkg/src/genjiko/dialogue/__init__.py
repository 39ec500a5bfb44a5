from .store import (
    AggregateStats,
    DynamicRecord,
    DynamicStore,
    KnowledgeDoc,
    StaticStore,
    load_docs_dir,
    tokenize,
)
from .alignment import (
    ALIGNED,
    DIVERGENT,
    PARTIALLY_ALIGNED,
    Alignment,
    ai_match_judgment,
    compute_alignment,
)
from .prompts import PromptBundle, Snippet, assemble_prompt, class_names, trend_word
from .clients import LiveClient, StubClient, Utterance, generate
from .orchestrator import DialogueOrchestrator, default_persona, default_static_store

__all__ = [
    "AggregateStats",
    "DynamicRecord",
    "DynamicStore",
    "KnowledgeDoc",
    "StaticStore",
    "load_docs_dir",
    "tokenize",
    "ALIGNED",
    "DIVERGENT",
    "PARTIALLY_ALIGNED",
    "Alignment",
    "ai_match_judgment",
    "compute_alignment",
    "PromptBundle",
    "Snippet",
    "assemble_prompt",
    "class_names",
    "trend_word",
    "LiveClient",
    "StubClient",
    "Utterance",
    "generate",
    "DialogueOrchestrator",
    "default_persona",
    "default_static_store",
]
