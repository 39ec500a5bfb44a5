"""Set-partition combinatorics behind Genji-mon patterns.

A game over five scents is summarized by a set partition of the rounds:
rounds judged to smell the same share a group.  Partitions are stored as
restricted-growth strings (RGS), the canonical label-sequence encoding, so
``[0, 0, 1, 0, 1]`` means rounds 1, 2, 4 share one scent and rounds 3, 5
another.  Bell(5) = 52 distinct patterns exist, one per Genji-mon.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .errors import DomainError, InvalidJudgmentError

MAX_ROUNDS = 5


@dataclass(frozen=True)
class Judgment:
    """One round's call: the scent matches a prior round, or is new.

    ``matches`` is the 1-based prior round the player points at, or None
    for "distinct scent".  Two judgments pointing into the same group are
    equivalent; partition semantics only use the group of the target.
    """

    matches: int | None = None

    @classmethod
    def new(cls) -> "Judgment":
        return cls(None)

    @classmethod
    def match(cls, round_no: int) -> "Judgment":
        if round_no < 1:
            raise InvalidJudgmentError(f"match target must be >= 1, got {round_no}")
        return cls(round_no)

    @property
    def is_new(self) -> bool:
        return self.matches is None

    def to_json(self) -> str | int:
        return "new" if self.matches is None else self.matches

    @classmethod
    def from_json(cls, value) -> "Judgment":
        if value == "new":
            return cls.new()
        if isinstance(value, int) and not isinstance(value, bool):
            return cls.match(value)
        raise InvalidJudgmentError(f"not a judgment: {value!r}")

    def __str__(self) -> str:
        return "new" if self.matches is None else f"match({self.matches})"


@dataclass(frozen=True)
class Partition:
    """A set partition of rounds 1..n as a restricted-growth string."""

    rgs: tuple[int, ...]

    def __post_init__(self):
        n = len(self.rgs)
        if not 1 <= n <= MAX_ROUNDS:
            raise DomainError(f"partition must cover 1..{MAX_ROUNDS} rounds, got {n}")
        seen_max = -1
        for i, label in enumerate(self.rgs):
            if not isinstance(label, int) or label < 0:
                raise DomainError(f"labels must be non-negative integers, got {label!r}")
            if label > seen_max + 1:
                raise DomainError(
                    f"restricted-growth violation at position {i}: "
                    f"label {label} after max {seen_max}"
                )
            seen_max = max(seen_max, label)

    @classmethod
    def singleton(cls) -> "Partition":
        """The round-1 state: one scent, one group."""
        return cls((0,))

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        """Canonicalize an arbitrary label sequence by first occurrence."""
        mapping: dict = {}
        rgs = []
        for value in labels:
            if value not in mapping:
                mapping[value] = len(mapping)
            rgs.append(mapping[value])
        return cls(tuple(rgs))

    @property
    def n(self) -> int:
        return len(self.rgs)

    @property
    def group_count(self) -> int:
        return max(self.rgs) + 1

    def group_of(self, round_no: int) -> int:
        if not 1 <= round_no <= self.n:
            raise DomainError(f"round {round_no} outside 1..{self.n}")
        return self.rgs[round_no - 1]

    def groups(self) -> tuple[tuple[int, ...], ...]:
        """Groups as tuples of 1-based rounds, ordered by group label."""
        blocks: list[list[int]] = [[] for _ in range(self.group_count)]
        for idx, label in enumerate(self.rgs):
            blocks[label].append(idx + 1)
        return tuple(tuple(block) for block in blocks)

    def same_group(self, i: int, j: int) -> bool:
        return self.group_of(i) == self.group_of(j)

    def key(self) -> str:
        """Canonical id string, e.g. "00101"."""
        return "".join(str(label) for label in self.rgs)

    @classmethod
    def from_key(cls, key: str) -> "Partition":
        if not key or not key.isdigit():
            raise DomainError(f"not an RGS key: {key!r}")
        return cls(tuple(int(ch) for ch in key))


@dataclass(frozen=True)
class AgreementScore:
    """Pairwise agreement between two partitions of the same rounds.

    ``pair_matches`` counts unordered round pairs on which the partitions
    agree (same group in both, or different group in both); for 5 rounds
    there are 10 pairs and ``rand_index`` is pair_matches / 10.
    """

    pair_matches: int
    pair_total: int
    exact: bool

    @property
    def rand_index(self) -> float:
        return self.pair_matches / self.pair_total

    def to_json(self) -> dict:
        return {
            "pair_matches": self.pair_matches,
            "pair_total": self.pair_total,
            "rand_index": self.rand_index,
            "exact": self.exact,
        }


def enumerate_partitions(n: int) -> list[Partition]:
    """All set partitions of {1..n} in lexicographic RGS order."""
    if not isinstance(n, int) or not 1 <= n <= MAX_ROUNDS:
        raise DomainError(f"n must be in 1..{MAX_ROUNDS}, got {n!r}")
    out: list[Partition] = []

    def extend(prefix: list[int], seen_max: int):
        if len(prefix) == n:
            out.append(Partition(tuple(prefix)))
            return
        for label in range(seen_max + 2):
            prefix.append(label)
            extend(prefix, max(seen_max, label))
            prefix.pop()

    extend([0], 0)
    return out


def apply_judgment(current: Partition, judgment: Judgment) -> Partition:
    """Extend a partition of rounds 1..k to 1..k+1 by one judgment."""
    if current.n >= MAX_ROUNDS:
        raise DomainError(f"cannot extend a partition past {MAX_ROUNDS} rounds")
    if judgment.is_new:
        return Partition(current.rgs + (current.group_count,))
    target = judgment.matches
    if not 1 <= target <= current.n:
        raise InvalidJudgmentError(
            f"round {current.n + 1} cannot match round {target}: "
            f"only rounds 1..{current.n} exist"
        )
    return Partition(current.rgs + (current.rgs[target - 1],))


def fold_judgments(judgments) -> Partition:
    """Fold any number (0..4) of judgments from the singleton partition."""
    partition = Partition.singleton()
    for offset, judgment in enumerate(judgments):
        try:
            partition = apply_judgment(partition, judgment)
        except InvalidJudgmentError as exc:
            raise InvalidJudgmentError(f"round {offset + 2}: {exc}") from exc
    return partition


def partition_from_judgments(judgments) -> Partition:
    """Build the full 5-round partition from the four judged rounds."""
    judgments = list(judgments)
    if len(judgments) != MAX_ROUNDS - 1:
        raise DomainError(
            f"expected {MAX_ROUNDS - 1} judgments for rounds 2..{MAX_ROUNDS}, "
            f"got {len(judgments)}"
        )
    for offset, judgment in enumerate(judgments):
        if not isinstance(judgment, Judgment):
            raise InvalidJudgmentError(f"round {offset + 2}: not a judgment: {judgment!r}")
    return fold_judgments(judgments)


def compare_patterns(player: Partition, truth: Partition) -> AgreementScore:
    """Score two partitions by agreement over all unordered round pairs."""
    if player.n != truth.n:
        raise DomainError(f"partition sizes differ: {player.n} vs {truth.n}")
    pairs = list(combinations(range(1, player.n + 1), 2))
    matches = sum(
        1
        for i, j in pairs
        if player.same_group(i, j) == truth.same_group(i, j)
    )
    return AgreementScore(
        pair_matches=matches,
        pair_total=len(pairs),
        exact=player.rgs == truth.rgs,
    )
