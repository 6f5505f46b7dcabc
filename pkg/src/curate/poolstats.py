"""Language-composition and overlap accounting.

Counts are exact and never sampled: these tables are the audit trail for
composition claims. English means language == "eng_Latn" exactly.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Any

from .errors import OperationError
from .parallel import map_ordered
from .records import ENGLISH, Pool


@dataclass(frozen=True)
class CompositionStats:
    total: int
    per_language_counts: dict[str, int]
    english_count: int
    non_english_count: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "total": self.total,
            "english_count": self.english_count,
            "non_english_count": self.non_english_count,
            "per_language_counts": {
                lang: self.per_language_counts[lang] for lang in sorted(self.per_language_counts)
            },
        }


def language_composition(pool: Pool, *, threads: int | None = None) -> CompositionStats:
    """Exact per-language counts; errors if any record lacks a language."""

    def count_shard(shard) -> Counter:
        counts: Counter = Counter()
        for rec in shard[1]():
            if not rec.language:
                raise OperationError(f"record {rec.uid} missing language")
            counts[rec.language] += 1
        return counts

    merged: Counter = Counter()
    for counts in map_ordered(count_shard, pool.shards, threads):
        merged.update(counts)
    total = sum(merged.values())
    english = merged.get(ENGLISH, 0)
    return CompositionStats(
        total=total,
        per_language_counts=dict(merged),
        english_count=english,
        non_english_count=total - english,
    )


def overlap(left: Pool, right: Pool) -> tuple[int, dict[str, int]]:
    """Uid-set intersection cardinality and its language breakdown.

    Both pools must be single-copy. The breakdown uses the left record's
    language (both sides stem from the same parent pool, so they agree).
    """
    for pool, side in ((left, "left"), (right, "right")):
        if pool.multiset:
            raise OperationError(f"multiset input not allowed: {side} operand")
    it_l = left.iter_records()
    it_r = right.iter_records()
    rec_l = next(it_l, None)
    rec_r = next(it_r, None)
    count = 0
    per_language: Counter = Counter()
    while rec_l is not None and rec_r is not None:
        if rec_l.uid < rec_r.uid:
            rec_l = next(it_l, None)
        elif rec_r.uid < rec_l.uid:
            rec_r = next(it_r, None)
        else:
            count += 1
            per_language[rec_l.language or ""] += 1
            rec_l = next(it_l, None)
            rec_r = next(it_r, None)
    return count, dict(per_language)


def composition_delta(
    before: CompositionStats, after: CompositionStats
) -> dict[str, float]:
    """Per-language change of representation share, in percentage points,
    sorted by absolute magnitude descending (ties: language ascending)."""
    if before.total <= 0 or after.total <= 0:
        raise OperationError("composition_delta requires positive totals")
    languages = set(before.per_language_counts) | set(after.per_language_counts)
    deltas = {}
    for lang in languages:
        share_before = 100.0 * before.per_language_counts.get(lang, 0) / before.total
        share_after = 100.0 * after.per_language_counts.get(lang, 0) / after.total
        deltas[lang] = share_after - share_before
    ordered = sorted(deltas.items(), key=lambda item: (-abs(item[1]), item[0]))
    return dict(ordered)
