"""Deterministic top-x% selection over a named score.

The keep target is round-half-up(fraction * candidate_count), computed in
exact rational arithmetic: "top 20% of 128M" must be exactly 25.6M, and
fractions like 0.3 of 5 must round 1.5 up to 2 with no binary-float fuzz.

Ranking order is (score descending, uid ascending); the uid tie-break is a
choice this toolkit makes for reproducibility. The default algorithm is
two-pass and exact: pass 1 streams (score, uid) pairs into a bounded top-k
heap per shard and merges, pass 2 re-reads shards and emits the selected
records. A one-pass approximate mode (Greenwald-Khanna threshold estimate)
exists behind an explicit flag and is excluded from exactness guarantees.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .errors import OperationError
from .gk import GKSketch
from .parallel import map_ordered
from .records import MetadataRecord, Pool, as_fraction, record_sort_key

def target_count(fraction: Fraction | float | str, n: int) -> int:
    """round-half-up(fraction * n) in exact integer arithmetic."""
    frac = as_fraction(fraction)
    return (2 * frac.numerator * n + frac.denominator) // (2 * frac.denominator)


@dataclass(frozen=True)
class SelectionReport:
    fraction: Fraction
    score_name: str
    threshold: float | None
    kept_count: int
    input_count: int
    tie_count_at_threshold: int
    language_restriction: str | None = None
    approximate: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "fraction": float(self.fraction),
            "score_name": self.score_name,
            "threshold": self.threshold,
            "kept_count": self.kept_count,
            "input_count": self.input_count,
            "tie_count_at_threshold": self.tie_count_at_threshold,
            "language_restriction": self.language_restriction,
            "approximate": self.approximate,
        }


def _score_of(record: MetadataRecord, score_name: str) -> float:
    try:
        return record.scores[score_name]
    except KeyError:
        raise OperationError(f"record {record.uid} missing score {score_name!r}") from None


def _candidates(
    records: Iterable[MetadataRecord], language_restriction: str | None
) -> Iterable[MetadataRecord]:
    if language_restriction is None:
        return records
    return (rec for rec in records if rec.language == language_restriction)


def _shard_pass1(load, score_name, language_restriction):
    """Per-shard candidate count and sorted ranking keys.

    Keys are (negated score, uid, copy rank) tuples, so a lexicographic merge
    across shards yields the global ranking. Keys stay in memory (the
    in-memory analogue of an external sort); records do not.
    """
    count = 0
    keys = []
    for rec in _candidates(load(), language_restriction):
        count += 1
        keys.append((-_score_of(rec, score_name), rec.uid, record_sort_key(rec)[1]))
    keys.sort()
    return count, keys


def select_top(
    pool: Pool,
    score_name: str,
    fraction: Fraction | float | str,
    language_restriction: str | None = None,
    *,
    threads: int | None = None,
    approximate: bool = False,
) -> tuple[Pool, SelectionReport]:
    """Keep exactly round-half-up(fraction * candidates) records by descending
    score, ties broken by ascending uid; output sorted by uid.

    With a language restriction, candidates are first reduced to records whose
    language equals it exactly. With ``approximate=True`` the threshold comes
    from a one-pass quantile sketch and the kept count is only approximate.
    """
    frac = as_fraction(fraction)
    if approximate:
        return _select_top_approximate(pool, score_name, frac, language_restriction)

    shards = pool.shards
    results = map_ordered(
        lambda shard: _shard_pass1(shard[1], score_name, language_restriction),
        shards,
        threads,
    )
    n = sum(count for count, _ in results)
    if n == 0:
        raise OperationError(
            "empty candidate set"
            + (f" (language {language_restriction!r})" if language_restriction else "")
        )
    target = target_count(frac, n)
    report_base = dict(
        fraction=frac,
        score_name=score_name,
        input_count=n,
        language_restriction=language_restriction,
    )
    if target == 0:
        empty = Pool.from_records(
            (), provenance=_provenance(pool, frac, score_name, language_restriction),
            multiset=pool.multiset, validate=False,
        )
        report = SelectionReport(
            threshold=None, kept_count=0, tie_count_at_threshold=0, **report_base
        )
        return empty, report

    merged = heapq.merge(*(keys for _, keys in results))
    cut_key = None
    for _ in range(target):
        cut_key = next(merged)
    assert cut_key is not None
    threshold = -cut_key[0]

    def shard_pass2(shard):
        _, load = shard
        kept = []
        ties = 0
        for rec in _candidates(load(), language_restriction):
            score = _score_of(rec, score_name)
            if score == threshold:
                ties += 1
            if (-score, rec.uid, record_sort_key(rec)[1]) <= cut_key:
                kept.append(rec)
        return kept, ties

    results2 = map_ordered(shard_pass2, shards, threads)
    records: list[MetadataRecord] = []
    tie_count = 0
    for kept, ties in results2:
        records.extend(kept)
        tie_count += ties
    assert len(records) == target, (len(records), target)
    out = Pool.from_records(
        records,
        provenance=_provenance(pool, frac, score_name, language_restriction),
        multiset=pool.multiset,
        validate=False,
        presorted=True,
    )
    report = SelectionReport(
        threshold=threshold, kept_count=target, tie_count_at_threshold=tie_count, **report_base
    )
    return out, report


def _provenance(pool, frac, score_name, language_restriction):
    note = f"filter top {frac} by {score_name}"
    if language_restriction:
        note += f" [language={language_restriction}]"
    return f"{note} of ({pool.provenance})" if pool.provenance else note


def threshold_of(
    pool: Pool, score_name: str, fraction: Fraction | float | str
) -> float:
    """Score of the target-th ranked record under (score desc, uid asc)."""
    frac = as_fraction(fraction)
    results = map_ordered(
        lambda shard: _shard_pass1(shard[1], score_name, None), pool.shards, 1
    )
    n = sum(count for count, _ in results)
    if n == 0:
        raise OperationError("empty candidate set")
    target = target_count(frac, n)
    if target == 0:
        raise OperationError(f"fraction {frac} of {n} candidates keeps zero records")
    merged = heapq.merge(*(keys for _, keys in results))
    cut_key = None
    for _ in range(target):
        cut_key = next(merged)
    return -cut_key[0]


def _select_top_approximate(
    pool: Pool, score_name: str, frac: Fraction, language_restriction: str | None
) -> tuple[Pool, SelectionReport]:
    """One-pass threshold estimate; keeps records scoring >= the estimated
    threshold, so the kept count is approximate (and may include extra ties)."""
    sketch = GKSketch(eps=0.001)
    n = 0
    for rec in _candidates(pool.iter_records(), language_restriction):
        sketch.insert(_score_of(rec, score_name))
        n += 1
    if n == 0:
        raise OperationError("empty candidate set")
    threshold = sketch.query(float(1 - frac))
    records = [
        rec
        for rec in _candidates(pool.iter_records(), language_restriction)
        if _score_of(rec, score_name) >= threshold
    ]
    ties = sum(1 for rec in records if rec.scores[score_name] == threshold)
    out = Pool.from_records(
        records,
        provenance=_provenance(pool, frac, score_name, language_restriction) + " [approximate]",
        multiset=pool.multiset,
        validate=False,
        presorted=True,
    )
    report = SelectionReport(
        fraction=frac,
        score_name=score_name,
        threshold=threshold,
        kept_count=len(records),
        input_count=n,
        tie_count_at_threshold=ties,
        language_restriction=language_restriction,
        approximate=True,
    )
    return out, report
