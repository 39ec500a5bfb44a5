"""Utterance generation: a deterministic stub and a live chat client.

The stub renders fixed templates per (mode, alignment verdict) from the
prompt bundle alone, byte-for-byte reproducible, so the whole game runs
offline.  The live client speaks JSON chat-completions over HTTPS to a
configurable endpoint; failures surface with retry-after metadata instead
of crashing the session.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import httpx

from ..errors import LlmClientError
from .prompts import PromptBundle, judgment_phrase


@dataclass(frozen=True)
class Utterance:
    mode: str
    text: str
    round: int | None = None
    alignment: str | None = None
    retrieved_doc_ids: tuple[str, ...] = ()
    audio_url: str | None = None  # hook for a future speech layer

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "text": self.text,
            "round": self.round,
            "alignment": self.alignment,
            "retrieved_doc_ids": list(self.retrieved_doc_ids),
            "audio_url": self.audio_url,
        }


class StubClient:
    """Offline co-smeller voice: a pure function of the prompt bundle."""

    name = "stub"

    def complete(self, bundle: PromptBundle) -> str:
        facts = bundle.facts
        if bundle.mode == "briefing":
            text = (
                "Welcome. Five scents will visit us, one breath at a time. "
                "I listen through nine small sensors; you listen through memory. "
                "First we settle the nose with five quiet samples, then the rounds begin."
            )
            if "prior_sessions" in facts:
                text += (
                    f" {facts['prior_sessions']['count']} players have walked "
                    "this sequence before us; their groupings wait at the end."
                )
            return text
        if bundle.mode == "round":
            return self._round_text(facts)
        return self._debrief_text(facts)

    def _round_text(self, facts: dict) -> str:
        r = facts["round"]
        trends = facts.get("trends")
        trend_line = f" My channels read {trends}." if trends else ""
        votes = facts.get("vote_distribution")
        vote_line = f" My windows voted [{', '.join(votes)}]." if votes else ""
        alignment = facts.get("alignment")
        if alignment is None:
            return (
                f"Round {r}. A first scent, the anchor for everything after."
                f"{trend_line} Hold it gently; the others will be measured against it."
            )
        human = judgment_phrase(facts["human_judgment"])
        ai = judgment_phrase(facts["ai_judgment"])
        verdict = alignment["verdict"]
        if verdict == "aligned":
            return (
                f"In round {r}, we agree: {human}. We breathe as one, human and "
                f"machine.{vote_line}{trend_line}"
            )
        if verdict == "partially_aligned":
            return (
                f"Round {r}. We both hear an echo, but from different rooms: "
                f"you say {human}, I lean toward {ai}.{vote_line} Perhaps revisit "
                "the earlier scents before you confirm."
            )
        return (
            f"Round {r}. Here our paths part: you say {human}, my sensors say "
            f"{ai}.{vote_line}{trend_line} Sit with the difference; you may revise."
        )

    def _debrief_text(self, facts: dict) -> str:
        lines = []
        for entry in facts["rounds"]:
            if "ai_class" in entry:
                lines.append(f"round {entry['round']} smelled to me of {entry['ai_class']}")
            else:
                lines.append(f"round {entry['round']} passed without my sensors")
        agreement = (
            "Our patterns match exactly."
            if facts["exact"]
            else f"Our patterns agree on {facts['pair_matches']} of 10 pairs."
        )
        return (
            "The pattern is complete. In my own nose, "
            + "; ".join(lines)
            + f". {agreement} Thank you for listening alongside me."
        )


class LiveClient:
    """JSON-over-HTTPS chat-completion client (OpenAI-style schema)."""

    name = "live"

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key_env: str = "LLM_API_KEY",
        timeout_s: float = 30.0,
    ):
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s

    def complete(self, bundle: PromptBundle) -> str:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": bundle.rendered()},
                {
                    "role": "user",
                    "content": f"Speak one short {bundle.mode} reflection to the player.",
                },
            ],
        }
        try:
            response = httpx.post(
                self.endpoint, json=payload, headers=headers, timeout=self.timeout_s
            )
            response.raise_for_status()
            body = response.json()
            return body["choices"][0]["message"]["content"]
        except httpx.HTTPStatusError as exc:
            retry = exc.response.headers.get("Retry-After")
            raise LlmClientError(
                f"chat endpoint returned {exc.response.status_code}",
                retry_after_s=float(retry) if retry else None,
            ) from exc
        except (httpx.HTTPError, KeyError, ValueError) as exc:
            raise LlmClientError(f"chat request failed: {exc}") from exc


def generate(client, bundle: PromptBundle, store=None, session_id: str | None = None) -> Utterance:
    """Run the client over a bundle and record the utterance."""
    text = client.complete(bundle)
    alignment = bundle.facts.get("alignment")
    utterance = Utterance(
        mode=bundle.mode,
        text=text,
        round=bundle.facts.get("round"),
        alignment=alignment["verdict"] if alignment else None,
        retrieved_doc_ids=tuple(s.doc_id for s in bundle.snippets),
    )
    if store is not None and session_id is not None:
        store.record_utterance(session_id, utterance.to_json())
    return utterance
