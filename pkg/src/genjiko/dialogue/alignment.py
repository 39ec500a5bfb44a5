"""The AI's own match judgment and human/AI alignment classification."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import DomainError
from ..genjimon import Judgment, Partition

ALIGNED = "aligned"
DIVERGENT = "divergent"
PARTIALLY_ALIGNED = "partially_aligned"


@dataclass(frozen=True)
class Alignment:
    verdict: str
    human_group: int  # partition label the human's judgment lands in
    ai_group: int

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "human_group": self.human_group,
            "ai_group": self.ai_group,
        }


def _argmax(prediction) -> int:
    probs = getattr(prediction, "probs", prediction)
    best, best_p = 0, probs[0]
    for i, p in enumerate(probs):
        if p > best_p:
            best, best_p = i, p
    return best


def ai_match_judgment(predictions, current_round: int) -> Judgment:
    """Match the smallest prior round whose predicted class equals this
    round's, else call the scent new."""
    predictions = list(predictions)
    if current_round < 2:
        raise DomainError("the first round carries no judgment")
    if len(predictions) < current_round or any(
        predictions[r] is None for r in range(current_round)
    ):
        raise DomainError(
            f"need predictions for rounds 1..{current_round}, have {len(predictions)}"
        )
    current = _argmax(predictions[current_round - 1])
    for j in range(1, current_round):
        if _argmax(predictions[j - 1]) == current:
            return Judgment.match(j)
    return Judgment.new()


def _landing_group(judgment: Judgment, prefix: Partition) -> int:
    if judgment.is_new:
        return prefix.group_count
    if not 1 <= judgment.matches <= prefix.n:
        raise DomainError(f"judgment targets round {judgment.matches} outside 1..{prefix.n}")
    return prefix.group_of(judgment.matches)


def compute_alignment(human: Judgment, ai: Judgment, prefix: Partition) -> Alignment:
    """Do the two judgments extend the confirmed partition the same way?

    Both judgments are for round prefix.n + 1.  Matching different rounds
    of one group still aligns; match vs match into different groups is
    partial alignment; new vs match diverges outright.
    """
    human_group = _landing_group(human, prefix)
    ai_group = _landing_group(ai, prefix)
    if human_group == ai_group:
        verdict = ALIGNED
    elif not human.is_new and not ai.is_new:
        verdict = PARTIALLY_ALIGNED
    else:
        verdict = DIVERGENT
    return Alignment(verdict=verdict, human_group=human_group, ai_group=ai_group)
