"""User similarity as the Jaccard coefficient over POI-id sets.

Scores live as exact integer pairs (shared, union); division happens only
when a float or display string is needed, so ranking and equality checks
never hinge on float rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import AbstractSet, Mapping


@dataclass(frozen=True)
class SimilarityRecord:
    """Similarity of one unordered user pair, with user_a < user_b."""

    user_a: str
    user_b: str
    shared: int
    union: int

    @property
    def exact_score(self) -> Fraction:
        return Fraction(self.shared, self.union) if self.union else Fraction(0)

    @property
    def score(self) -> float:
        return self.shared / self.union if self.union else 0.0


def jaccard(a: AbstractSet[int], b: AbstractSet[int]) -> float:
    """|a ∩ b| / |a ∪ b|; two empty sets score 0 rather than 1."""
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def rank_pairs(sets: Mapping[str, AbstractSet[int]]) -> list[SimilarityRecord]:
    """All-pairs similarity report, most similar first.

    One record per unordered pair (n*(n-1)/2 records), sorted by score
    descending with ties broken by the (user_a, user_b) names. Needs at
    least two users.
    """
    users = sorted(sets)
    if len(users) < 2:
        raise ValueError("similarity ranking needs at least 2 users")
    records: list[SimilarityRecord] = []
    for i, user_a in enumerate(users):
        for user_b in users[i + 1 :]:
            a, b = sets[user_a], sets[user_b]
            records.append(
                SimilarityRecord(
                    user_a=user_a,
                    user_b=user_b,
                    shared=len(a & b),
                    union=len(a | b),
                )
            )
    records.sort(key=lambda r: (-r.exact_score, r.user_a, r.user_b))
    return records


def format_score_2dp(record: SimilarityRecord) -> str:
    """Display form truncated (floored) to two decimals, e.g. 8/9 -> '0.88'."""
    hundredths = record.shared * 100 // record.union if record.union else 0
    return f"{hundredths // 100}.{hundredths % 100:02d}"
