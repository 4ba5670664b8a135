from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .mlq import Sector

__all__ = ["PatternQuery"]


@dataclass(frozen=True)
class PatternQuery:
    """Event ``w_p = label`` for each ``(p, label)`` pair; positions are 1-based."""

    assignments: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        pairs = tuple((int(p), int(x)) for p, x in self.assignments)
        object.__setattr__(self, "assignments", pairs)
        positions = [p for p, _ in pairs]
        if len(set(positions)) != len(positions):
            raise ValueError(f"positions must be distinct: {positions}")
        if any(p < 1 for p in positions) or any(x < 1 for _, x in pairs):
            raise ValueError("positions and labels are 1-based")

    @classmethod
    def prefix(cls, labels: Sequence[int]) -> "PatternQuery":
        """Labels at consecutive positions 1, 2, ..."""
        return cls(tuple((a + 1, x) for a, x in enumerate(labels)))

    @classmethod
    def of(cls, pairs: Iterable[tuple[int, int]]) -> "PatternQuery":
        return cls(tuple(pairs))

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(x for _, x in self.assignments)

    def shifted(self, k: int, N: int) -> "PatternQuery":
        return PatternQuery(tuple(((p - 1 + k) % N + 1, x) for p, x in self.assignments))

    def relabeled(self, mapping: dict[int, int]) -> "PatternQuery":
        return PatternQuery(tuple((p, mapping[x]) for p, x in self.assignments))

    def validate(self, sector: Sector) -> None:
        """Raise ``ValueError`` unless the event is possible in ``sector``."""
        if any(p > sector.N for p, _ in self.assignments):
            raise ValueError(f"position beyond ring size {sector.N}")
        for label, used in Counter(self.labels).items():
            if label > sector.n or used > sector.counts[label - 1]:
                raise ValueError(f"label {label} cannot appear {used} times in sector {sector}")

    def matches(self, word: Sequence[int]) -> bool:
        return all(word[p - 1] == x for p, x in self.assignments)

    def __str__(self) -> str:
        return " ".join(f"w{p}={x}" for p, x in self.assignments)
