"""Knowledge stores behind the co-smelling partner's dialogue.

The static store is an immutable BM25 keyword index over curated Markdown
docs, each tagged with the dialogue modes it may surface in.  The dynamic
store accumulates per-session sensing summaries, judgments, and utterances
as append-only JSONL, plus a compacted aggregates file that answers
"how did earlier players group these scents".
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..errors import DomainError

MODES = ("briefing", "round", "debrief")

BM25_K1 = 1.2
BM25_B = 0.75

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class KnowledgeDoc:
    doc_id: str
    mode_tags: frozenset[str]
    title: str
    body: str

    def __post_init__(self):
        if not self.body.strip():
            raise DomainError(f"doc {self.doc_id}: empty body")
        if not self.mode_tags:
            raise DomainError(f"doc {self.doc_id}: needs at least one mode tag")
        unknown = self.mode_tags - set(MODES)
        if unknown:
            raise DomainError(f"doc {self.doc_id}: unknown mode tags {sorted(unknown)}")


class StaticStore:
    """BM25 index (k1=1.2, b=0.75, Lucene-style IDF) over knowledge docs."""

    def __init__(self, docs):
        self.docs: dict[str, KnowledgeDoc] = {}
        for doc in docs:
            if doc.doc_id in self.docs:
                raise DomainError(f"duplicate doc_id {doc.doc_id}")
            self.docs[doc.doc_id] = doc
        self._tf = {doc_id: Counter(tokenize(doc.title + " " + doc.body))
                    for doc_id, doc in self.docs.items()}
        self._len = {doc_id: sum(tf.values()) for doc_id, tf in self._tf.items()}
        self._avg_len = (sum(self._len.values()) / len(self._len)) if self._len else 0.0
        self._df = Counter()
        for tf in self._tf.values():
            self._df.update(tf.keys())

    def __len__(self) -> int:
        return len(self.docs)

    def _idf(self, term: str) -> float:
        df = self._df.get(term, 0)
        n = len(self.docs)
        return math.log(1.0 + (n - df + 0.5) / (df + 0.5))

    def _score(self, doc_id: str, terms) -> float:
        tf = self._tf[doc_id]
        norm = 1.0 - BM25_B + BM25_B * self._len[doc_id] / self._avg_len
        score = 0.0
        for term in terms:
            f = tf.get(term, 0)
            if f:
                score += self._idf(term) * f * (BM25_K1 + 1.0) / (f + BM25_K1 * norm)
        return score

    def retrieve(self, query: str, mode: str, k: int) -> list[tuple[KnowledgeDoc, float]]:
        """Top-k mode-tagged docs by BM25 score, ties broken by doc_id."""
        if mode not in MODES:
            raise DomainError(f"unknown mode {mode!r}")
        if k < 1:
            raise DomainError(f"k must be >= 1, got {k}")
        if not self.docs:
            return []
        terms = tokenize(query)
        scored = [
            (doc, self._score(doc_id, terms))
            for doc_id, doc in self.docs.items()
            if mode in doc.mode_tags
        ]
        scored = [(doc, s) for doc, s in scored if s > 0.0]
        scored.sort(key=lambda pair: (-pair[1], pair[0].doc_id))
        return scored[:k]


_FRONT_MATTER_RE = re.compile(r"\A---\n(.*?)\n---\n", re.DOTALL)


def parse_doc(text: str, fallback_id: str = "") -> KnowledgeDoc:
    match = _FRONT_MATTER_RE.match(text)
    if not match:
        raise DomainError(f"doc {fallback_id}: missing front matter")
    front = yaml.safe_load(match.group(1)) or {}
    body = text[match.end():]
    return KnowledgeDoc(
        doc_id=front.get("doc_id", fallback_id),
        mode_tags=frozenset(front.get("mode_tags", [])),
        title=front.get("title", fallback_id),
        body=body,
    )


def load_docs_dir(directory) -> list[KnowledgeDoc]:
    directory = Path(directory)
    docs = []
    for path in sorted(directory.glob("*.md")):
        docs.append(parse_doc(path.read_text(encoding="utf-8"), fallback_id=path.stem))
    return docs


@dataclass(frozen=True)
class DynamicRecord:
    """One round's sensing-and-judgment summary for a session."""

    session_id: str
    round: int
    trend_slopes: tuple[float, ...]  # per channel, units/s
    prediction: tuple[float, ...]  # 5-class distribution
    human_judgment: str | int | None  # judgment json form; round 1 has none
    ai_judgment: str | int | None
    low_confidence: bool = False

    def __post_init__(self):
        if self.round == 1 and self.human_judgment is not None:
            raise DomainError("round 1 carries no human judgment")

    def to_json(self) -> dict:
        return {
            "type": "round",
            "session_id": self.session_id,
            "round": self.round,
            "trend_slopes": list(self.trend_slopes),
            "prediction": list(self.prediction),
            "human_judgment": self.human_judgment,
            "ai_judgment": self.ai_judgment,
            "low_confidence": self.low_confidence,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DynamicRecord":
        return cls(
            session_id=obj["session_id"],
            round=obj["round"],
            trend_slopes=tuple(obj["trend_slopes"]),
            prediction=tuple(obj["prediction"]),
            human_judgment=obj.get("human_judgment"),
            ai_judgment=obj.get("ai_judgment"),
            low_confidence=obj.get("low_confidence", False),
        )


@dataclass
class AggregateStats:
    """How completed sessions grouped each round pair, for one sequence."""

    session_count: int
    pair_fractions: dict[str, float] | None  # "i-j" -> fraction, None when empty

    @staticmethod
    def pair_key(i: int, j: int) -> str:
        lo, hi = sorted((i, j))
        return f"{lo}-{hi}"

    def to_json(self) -> dict:
        return {"session_count": self.session_count, "pair_fractions": self.pair_fractions}


ALL_PAIRS = [(i, j) for i in range(1, 6) for j in range(i + 1, 6)]


class DynamicStore:
    """Per-session round records and utterances, plus cross-session aggregates.

    With a directory, every record appends to ``dynamic/<session_id>.jsonl``
    and completions compact into ``aggregates.json``; without one the store
    is purely in-memory (handy for tests and headless simulation).
    """

    def __init__(self, directory=None):
        self.directory = Path(directory) if directory else None
        self._rounds: dict[str, dict[int, DynamicRecord]] = {}
        self._utterances: dict[str, list[dict]] = {}
        self._aggregates: dict[str, dict] = {}
        if self.directory:
            (self.directory / "dynamic").mkdir(parents=True, exist_ok=True)
            agg_path = self.directory / "aggregates.json"
            if agg_path.exists():
                self._aggregates = json.loads(agg_path.read_text(encoding="utf-8"))

    def _append(self, session_id: str, payload: dict):
        if not self.directory:
            return
        path = self.directory / "dynamic" / f"{session_id}.jsonl"
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(payload, sort_keys=True) + "\n")

    def record_round(self, record: DynamicRecord):
        self._rounds.setdefault(record.session_id, {})[record.round] = record
        self._append(record.session_id, record.to_json())

    def round_record(self, session_id: str, round_no: int) -> DynamicRecord | None:
        return self._rounds.get(session_id, {}).get(round_no)

    def record_utterance(self, session_id: str, utterance: dict):
        self._utterances.setdefault(session_id, []).append(utterance)
        self._append(session_id, {"type": "utterance", **utterance})

    def utterances(self, session_id: str) -> list[dict]:
        return list(self._utterances.get(session_id, []))

    def complete_session(self, session_id: str, sequence_id: str, final_rgs: str):
        """Fold a finished game's partition into the sequence aggregates."""
        labels = [int(ch) for ch in final_rgs]
        if len(labels) != 5:
            raise DomainError(f"final partition must cover 5 rounds, got {final_rgs!r}")
        agg = self._aggregates.setdefault(
            sequence_id, {"count": 0, "pair_counts": {}}
        )
        agg["count"] += 1
        for i, j in ALL_PAIRS:
            if labels[i - 1] == labels[j - 1]:
                key = AggregateStats.pair_key(i, j)
                agg["pair_counts"][key] = agg["pair_counts"].get(key, 0) + 1
        self._append(session_id, {
            "type": "completed", "session_id": session_id,
            "sequence_id": sequence_id, "final_rgs": final_rgs,
        })
        if self.directory:
            path = self.directory / "aggregates.json"
            path.write_text(
                json.dumps(self._aggregates, indent=2, sort_keys=True) + "\n",
                encoding="utf-8",
            )

    def aggregate(self, sequence_id: str) -> AggregateStats:
        agg = self._aggregates.get(sequence_id)
        if not agg or agg["count"] == 0:
            return AggregateStats(session_count=0, pair_fractions=None)
        count = agg["count"]
        fractions = {
            AggregateStats.pair_key(i, j): agg["pair_counts"].get(
                AggregateStats.pair_key(i, j), 0
            ) / count
            for i, j in ALL_PAIRS
        }
        return AggregateStats(session_count=count, pair_fractions=fractions)
