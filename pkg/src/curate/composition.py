"""Baseline training-set composition: caption replacement, union with caption
preference, duplicate concatenation, and recipe evaluation.

Union keeps one copy per uid and prefers the translated caption for uids
present in the translated subset (even when the original language is English);
uids present only in the raw subset keep their raw caption verbatim, which may
be non-English. Concatenation keeps both copies and flags the output multiset.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterator

from .errors import OperationError, ValidationError
from .records import CompositionRecipe, MetadataRecord, Pool
from .selection import select_top

_HISTOGRAM_KEYS = ("raw", "translated", "replacement")


@dataclass(frozen=True)
class CompositionReport:
    left_size: int
    right_size: int
    intersection_size: int
    output_size: int
    caption_source_histogram: dict[str, int]

    def to_dict(self) -> dict[str, Any]:
        return {
            "left_size": self.left_size,
            "right_size": self.right_size,
            "intersection_size": self.intersection_size,
            "output_size": self.output_size,
            "caption_source_histogram": dict(self.caption_source_histogram),
        }


def _histogram_bucket(caption_source: str) -> str:
    if caption_source in ("raw", "translated"):
        return caption_source
    return "replacement"


def _histogram(records) -> dict[str, int]:
    hist = {key: 0 for key in _HISTOGRAM_KEYS}
    for rec in records:
        hist[_histogram_bucket(rec.caption_source)] += 1
    return hist


def _require_caption(rec: MetadataRecord, field_name: str) -> None:
    if rec.caption(field_name) is None:
        raise OperationError(f"record {rec.uid} missing {field_name} caption")


def replace_captions(pool: Pool, caption_field: str) -> Pool:
    """Make the named caption column the training caption for every record."""
    if caption_field not in ("raw", "translated", "backtranslated"):
        raise ValidationError(f"unknown caption field {caption_field!r}")

    def swap(rec: MetadataRecord) -> MetadataRecord:
        _require_caption(rec, caption_field)
        return rec.with_caption_source(caption_field)

    provenance = f"replace-caption({caption_field})"
    if pool.provenance:
        provenance += f" of ({pool.provenance})"
    return pool.map_records(swap, provenance=provenance)


def _reject_multiset(pool: Pool, side: str) -> None:
    if pool.multiset:
        raise OperationError(f"multiset input not allowed: {side} operand")


def _merge_by_uid(
    left: Pool, right: Pool
) -> Iterator[tuple[MetadataRecord | None, MetadataRecord | None]]:
    """Sort-merge join of two single-copy pools over uid."""
    it_l = left.iter_records()
    it_r = right.iter_records()
    rec_l = next(it_l, None)
    rec_r = next(it_r, None)
    prev_l = prev_r = None
    while rec_l is not None or rec_r is not None:
        if rec_l is not None:
            if prev_l is not None and rec_l.uid == prev_l:
                raise OperationError(f"duplicate uid {rec_l.uid} in left operand")
        if rec_r is not None:
            if prev_r is not None and rec_r.uid == prev_r:
                raise OperationError(f"duplicate uid {rec_r.uid} in right operand")
        if rec_r is None or (rec_l is not None and rec_l.uid < rec_r.uid):
            yield rec_l, None
            prev_l = rec_l.uid
            rec_l = next(it_l, None)
        elif rec_l is None or rec_r.uid < rec_l.uid:
            yield None, rec_r
            prev_r = rec_r.uid
            rec_r = next(it_r, None)
        else:
            yield rec_l, rec_r
            prev_l, prev_r = rec_l.uid, rec_r.uid
            rec_l = next(it_l, None)
            rec_r = next(it_r, None)


def union_prefer_translated(
    raw_subset: Pool, translated_subset: Pool
) -> tuple[Pool, CompositionReport]:
    """One record per distinct uid; the translated caption wins wherever the
    uid appears in the translated subset."""
    _reject_multiset(raw_subset, "left")
    _reject_multiset(translated_subset, "right")
    records: list[MetadataRecord] = []
    left_size = right_size = intersection = 0
    for rec_l, rec_r in _merge_by_uid(raw_subset, translated_subset):
        if rec_l is not None:
            left_size += 1
        if rec_r is not None:
            right_size += 1
        if rec_r is not None:
            if rec_l is not None:
                intersection += 1
            _require_caption(rec_r, "translated")
            records.append(rec_r.with_caption_source("translated"))
        else:
            records.append(rec_l.with_caption_source("raw"))
    provenance = f"union({raw_subset.provenance} | {translated_subset.provenance})"
    pool = Pool.from_records(
        records, provenance=provenance, multiset=False, validate=False, presorted=True
    )
    report = CompositionReport(
        left_size=left_size,
        right_size=right_size,
        intersection_size=intersection,
        output_size=len(records),
        caption_source_histogram=_histogram(records),
    )
    return pool, report


def concat_both_captions(
    raw_subset: Pool, translated_subset: Pool
) -> tuple[Pool, CompositionReport]:
    """Multiset concatenation: raw copies and translated copies side by side;
    overlapping uids appear twice (raw-caption copy first in pool order)."""
    _reject_multiset(raw_subset, "left")
    _reject_multiset(translated_subset, "right")
    records: list[MetadataRecord] = []
    left_size = right_size = intersection = 0
    for rec_l, rec_r in _merge_by_uid(raw_subset, translated_subset):
        if rec_l is not None and rec_r is not None:
            intersection += 1
        if rec_l is not None:
            left_size += 1
            records.append(rec_l.with_caption_source("raw"))
        if rec_r is not None:
            right_size += 1
            _require_caption(rec_r, "translated")
            records.append(rec_r.with_caption_source("translated"))
    provenance = f"concat({raw_subset.provenance} & {translated_subset.provenance})"
    pool = Pool.from_records(
        records, provenance=provenance, multiset=True, validate=False, presorted=True
    )
    report = CompositionReport(
        left_size=left_size,
        right_size=right_size,
        intersection_size=intersection,
        output_size=len(records),
        caption_source_histogram=_histogram(records),
    )
    return pool, report


def run_recipe(
    recipe: CompositionRecipe, pool: Pool, *, threads: int | None = None
) -> tuple[Pool, CompositionReport]:
    """Evaluate a recipe tree bottom-up against the pool."""
    recipe.validate()
    return _run(recipe, pool, threads)


def _unary_report(input_size: int, out: Pool) -> CompositionReport:
    records = out.records()
    return CompositionReport(
        left_size=input_size,
        right_size=0,
        intersection_size=0,
        output_size=len(records),
        caption_source_histogram=_histogram(records),
    )


def _run(recipe: CompositionRecipe, pool: Pool, threads) -> tuple[Pool, CompositionReport]:
    if recipe.mode == "filter":
        base = _run(recipe.operands[0], pool, threads)[0] if recipe.operands else pool
        subset, _ = select_top(
            base,
            recipe.score_name,
            recipe.fraction,
            recipe.language_restriction,
            threads=threads,
        )
        if recipe.caption_field is not None:
            subset = replace_captions(subset, recipe.caption_field)
        return subset, _unary_report(len(base), subset)
    if recipe.mode == "replace-caption":
        base, _ = _run(recipe.operands[0], pool, threads)
        out = replace_captions(base, recipe.caption_field)
        return out, _unary_report(len(base), out)
    left, _ = _run(recipe.operands[0], pool, threads)
    right, _ = _run(recipe.operands[1], pool, threads)
    if recipe.mode == "union":
        return union_prefer_translated(left, right)
    return concat_both_captions(left, right)
