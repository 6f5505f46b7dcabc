"""Core domain types: metadata records, pools, embedding matrices, recipes.

All types are immutable after construction and safe to share across threads.
Validation is pure: `validate_record` reports violations, it never mutates.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import ValidationError

UID_PATTERN = re.compile(r"\A[0-9a-f]{32}\Z")

#: Caption columns a record can carry, keyed by the short names used in
#: recipes and in the serialized ``caption_source`` field.
CAPTION_FIELDS = ("raw", "translated", "backtranslated")

ENGLISH = "eng_Latn"

RECIPE_MODES = ("filter", "replace-caption", "union", "concat")


@dataclass(frozen=True)
class MetadataRecord:
    """One image-text sample. Only metadata: image bytes never enter this toolkit.

    ``caption_source`` names the caption column used for training ("raw" unless
    a composition step chose otherwise); the referenced column must be populated.
    """

    uid: str
    raw_caption: str
    url: str | None = None
    language: str | None = None
    translated_caption: str | None = None
    backtranslated_caption: str | None = None
    caption_source: str = "raw"
    scores: Mapping[str, float] = field(default_factory=dict)
    embedding_refs: Mapping[str, int] = field(default_factory=dict)

    def caption(self, field_name: str) -> str | None:
        """Text of the named caption column, or None when absent."""
        if field_name == "raw":
            return self.raw_caption
        if field_name == "translated":
            return self.translated_caption
        if field_name == "backtranslated":
            return self.backtranslated_caption
        raise ValueError(f"unknown caption field {field_name!r}")

    def training_caption(self) -> str:
        """The caption selected by caption_source."""
        text = self.caption(self.caption_source)
        if text is None:
            raise ValidationError(
                f"record {self.uid}: caption_source {self.caption_source!r} is not populated"
            )
        return text

    def with_score(self, name: str, value: float) -> "MetadataRecord":
        scores = dict(self.scores)
        scores[name] = value
        return replace(self, scores=scores)

    def with_caption_source(self, source: str) -> "MetadataRecord":
        if source == self.caption_source:
            return self
        return replace(self, caption_source=source)


@dataclass(frozen=True)
class Violation:
    """One violated invariant, naming the offending field."""

    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: {self.message}"


def _is_real(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def validate_record(record: MetadataRecord) -> list[Violation]:
    """Check every record invariant; an empty list means the record is valid.

    Non-finite scores are rejected rather than clamped: silently clamping
    would corrupt quantile thresholds downstream.
    """
    violations: list[Violation] = []
    if not isinstance(record.uid, str) or not UID_PATTERN.match(record.uid):
        violations.append(
            Violation("uid", f"uid must be 32 lowercase hex characters, got {record.uid!r}")
        )
    if not isinstance(record.raw_caption, str):
        violations.append(Violation("raw_caption", "raw caption must be a string"))
    for name in sorted(record.scores):
        value = record.scores[name]
        if not _is_real(value) or not np.isfinite(value):
            violations.append(Violation("scores", f"score {name!r} is not a finite number"))
        elif not -1.0 <= value <= 1.0:
            violations.append(Violation("scores", f"score {name!r} out of [-1, 1]: {value!r}"))
    for name in sorted(record.embedding_refs):
        ref = record.embedding_refs[name]
        if not isinstance(ref, int) or isinstance(ref, bool) or ref < 0:
            violations.append(
                Violation("embedding_refs", f"ref {name!r} must be a non-negative integer")
            )
    if record.translated_caption is not None and not record.language:
        violations.append(
            Violation("language", "language required when translated_caption is present")
        )
    if record.caption_source not in CAPTION_FIELDS:
        violations.append(
            Violation("caption_source", f"unknown caption field {record.caption_source!r}")
        )
    elif record.caption(record.caption_source) is None:
        violations.append(
            Violation(
                "caption_source",
                f"caption field {record.caption_source!r} is not populated",
            )
        )
    return violations


def record_sort_key(record: MetadataRecord) -> tuple[str, int, str]:
    """Total order for pools: ascending uid, raw-caption copy first on ties."""
    rank = 0 if record.caption_source == "raw" else 1
    return (record.uid, rank, record.caption_source)


@dataclass(frozen=True)
class ShardDescriptor:
    """Manifest entry for one shard file."""

    path: str
    record_count: int
    first_uid: str
    last_uid: str
    crc32: int | None = None


class Pool:
    """An ordered, sharded collection of MetadataRecords.

    Shards are loaded lazily: each shard pairs a descriptor with a loader
    callable, so file-backed pools stream one shard at a time. Iteration order
    is the pool total order (uid ascending, raw copy first on multiset ties).

    Single-copy pools hold each uid once; pools produced by duplicate
    concatenation are flagged ``multiset=True`` and may repeat a uid at most
    twice.
    """

    __slots__ = ("_shards", "provenance", "multiset")

    def __init__(
        self,
        shards: Iterable[tuple[ShardDescriptor, Callable[[], Sequence[MetadataRecord]]]],
        provenance: str = "",
        multiset: bool = False,
    ):
        self._shards = tuple(shards)
        self.provenance = provenance
        self.multiset = multiset

    @classmethod
    def from_records(
        cls,
        records: Iterable[MetadataRecord],
        *,
        provenance: str = "",
        multiset: bool = False,
        validate: bool = True,
        presorted: bool = False,
    ) -> "Pool":
        """Build an in-memory pool, sorting into the pool total order.

        With ``validate`` every record invariant and the uid-multiplicity rule
        is enforced; construction fails loudly rather than produce a bad pool.
        """
        recs = tuple(records) if presorted else tuple(sorted(records, key=record_sort_key))
        if validate:
            for rec in recs:
                violations = validate_record(rec)
                if violations:
                    raise ValidationError(
                        f"invalid record {rec.uid!r}: " + "; ".join(map(str, violations))
                    )
            _check_multiplicity(recs, multiset)
        if not recs:
            return cls((), provenance=provenance, multiset=multiset)
        descriptor = ShardDescriptor(
            path="<memory>",
            record_count=len(recs),
            first_uid=recs[0].uid,
            last_uid=recs[-1].uid,
        )
        return cls(
            ((descriptor, lambda recs=recs: recs),),
            provenance=provenance,
            multiset=multiset,
        )

    @property
    def shard_descriptors(self) -> tuple[ShardDescriptor, ...]:
        return tuple(descriptor for descriptor, _ in self._shards)

    @property
    def shards(self) -> tuple[tuple[ShardDescriptor, Callable[[], Sequence[MetadataRecord]]], ...]:
        return self._shards

    def iter_records(self) -> Iterator[MetadataRecord]:
        for _, load in self._shards:
            yield from load()

    def __iter__(self) -> Iterator[MetadataRecord]:
        return self.iter_records()

    def __len__(self) -> int:
        return sum(descriptor.record_count for descriptor, _ in self._shards)

    def records(self) -> tuple[MetadataRecord, ...]:
        """Materialize every record (desk-scale convenience)."""
        return tuple(self.iter_records())

    def map_records(
        self, fn: Callable[[MetadataRecord], MetadataRecord], provenance: str | None = None
    ) -> "Pool":
        """Lazy per-record map that must not change uid or caption_source rank.

        Used by operations that rewrite scores or captions in place; the
        mapping runs when a shard is iterated, keeping large pools streamable.
        """

        return self.map_shards(lambda recs: tuple(fn(rec) for rec in recs), provenance)

    def map_shards(
        self,
        fn: Callable[[Sequence[MetadataRecord]], Sequence[MetadataRecord]],
        provenance: str | None = None,
    ) -> "Pool":
        """Lazy per-shard map; `fn` must preserve record count and sort order."""

        def mapped(load: Callable[[], Sequence[MetadataRecord]]):
            return lambda: tuple(fn(load()))

        shards = tuple(
            (replace(descriptor, crc32=None), mapped(load)) for descriptor, load in self._shards
        )
        return Pool(
            shards,
            provenance=self.provenance if provenance is None else provenance,
            multiset=self.multiset,
        )


def _check_multiplicity(records: Sequence[MetadataRecord], multiset: bool) -> None:
    prev_uid = None
    run = 0
    for rec in records:
        if rec.uid == prev_uid:
            run += 1
            if not multiset:
                raise ValidationError(f"duplicate uid {rec.uid!r} in single-copy pool")
            if run >= 2:
                raise ValidationError(f"uid {rec.uid!r} appears more than twice in multiset pool")
        else:
            prev_uid = rec.uid
            run = 0


def validate_pool(pool: Pool) -> None:
    """Streaming check of pool-wide invariants: record validity, sort order,
    uid multiplicity. Raises ValidationError on the first violation."""
    prev_key: tuple[str, int, str] | None = None
    prev_uid = None
    run = 0
    for rec in pool.iter_records():
        violations = validate_record(rec)
        if violations:
            raise ValidationError(
                f"invalid record {rec.uid!r}: " + "; ".join(map(str, violations))
            )
        key = record_sort_key(rec)
        if prev_key is not None and key < prev_key:
            raise ValidationError(f"pool not sorted at uid {rec.uid!r}")
        if rec.uid == prev_uid:
            run += 1
            if not pool.multiset:
                raise ValidationError(f"duplicate uid {rec.uid!r} in single-copy pool")
            if run >= 2:
                raise ValidationError(f"uid {rec.uid!r} appears more than twice in multiset pool")
        else:
            prev_uid = rec.uid
            run = 0
        prev_key = key


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Dense float32 rows for one embedding space, optionally addressable by uid."""

    space_name: str
    rows: np.ndarray
    index: Mapping[str, int] | None = None

    def __post_init__(self):
        rows = np.ascontiguousarray(self.rows, dtype=np.float32)
        object.__setattr__(self, "rows", rows)
        if rows.ndim != 2 or rows.shape[1] < 1:
            raise ValidationError(
                f"embedding matrix {self.space_name!r} must be 2-D with positive dimension"
            )
        if rows.size and not np.isfinite(rows).all():
            raise ValidationError(f"embedding matrix {self.space_name!r} has non-finite entries")
        if self.index is not None:
            if len(set(self.index.values())) != len(self.index):
                raise ValidationError(f"uid index of {self.space_name!r} is not injective")
            for uid, row in self.index.items():
                if not 0 <= row < rows.shape[0]:
                    raise ValidationError(
                        f"uid index of {self.space_name!r}: row {row} for {uid!r} out of bounds"
                    )

    @property
    def dimension(self) -> int:
        return int(self.rows.shape[1])

    def __len__(self) -> int:
        return int(self.rows.shape[0])

    def row_for_uid(self, uid: str) -> np.ndarray:
        if self.index is None:
            raise ValidationError(f"embedding matrix {self.space_name!r} has no uid index")
        return self.rows[self.index[uid]]


def as_fraction(value: float | int | str | Fraction) -> Fraction:
    """Parse a keep fraction exactly.

    Floats go through their shortest decimal repr so that 0.2 means 1/5, not
    the nearest binary double; thresholds like "top 20% of 128M" must come out
    as exact integers.
    """
    if isinstance(value, Fraction):
        frac = value
    elif isinstance(value, int):
        frac = Fraction(value)
    elif isinstance(value, float):
        frac = Fraction(str(value))
    elif isinstance(value, str):
        frac = Fraction(value)
    else:
        raise ValidationError(f"cannot interpret fraction {value!r}")
    if not 0 < frac <= 1:
        raise ValidationError(f"fraction must be in (0, 1], got {value!r}")
    return frac


@dataclass(frozen=True)
class CompositionRecipe:
    """Declarative description of a baseline subset.

    Modes: ``filter`` (top-x% by a named score, optional language restriction),
    ``replace-caption`` (swap the training caption column), ``union`` (one copy
    per uid, right operand's caption preferred) and ``concat`` (duplicate
    concatenation, both captions kept).
    """

    mode: str
    score_name: str | None = None
    caption_field: str | None = None
    fraction: Fraction | None = None
    language_restriction: str | None = None
    operands: tuple["CompositionRecipe", ...] = ()

    def validate(self) -> None:
        if self.mode not in RECIPE_MODES:
            raise ValidationError(f"unknown recipe mode {self.mode!r}")
        if self.mode == "filter":
            if not self.score_name:
                raise ValidationError("filter recipe requires score_name")
            if self.fraction is None:
                raise ValidationError("filter recipe requires fraction")
            as_fraction(self.fraction)
            if len(self.operands) > 1:
                raise ValidationError("filter recipe takes at most one operand")
        elif self.mode == "replace-caption":
            if len(self.operands) != 1:
                raise ValidationError("replace-caption recipe requires exactly one operand")
            if self.caption_field not in CAPTION_FIELDS:
                raise ValidationError(
                    f"replace-caption recipe requires caption_field in {CAPTION_FIELDS}"
                )
        else:  # union / concat
            if len(self.operands) != 2:
                raise ValidationError(f"{self.mode} recipe requires exactly two operands")
        if self.caption_field is not None and self.caption_field not in CAPTION_FIELDS:
            raise ValidationError(f"unknown caption field {self.caption_field!r}")
        for operand in self.operands:
            operand.validate()

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CompositionRecipe":
        if not isinstance(data, Mapping):
            raise ValidationError("recipe must be a JSON object")
        unknown = set(data) - {
            "mode",
            "score_name",
            "caption_field",
            "fraction",
            "language_restriction",
            "operands",
        }
        if unknown:
            raise ValidationError(f"unknown recipe keys: {sorted(unknown)}")
        fraction = data.get("fraction")
        recipe = cls(
            mode=data.get("mode", ""),
            score_name=data.get("score_name"),
            caption_field=data.get("caption_field"),
            fraction=None if fraction is None else as_fraction(fraction),
            language_restriction=data.get("language_restriction"),
            operands=tuple(cls.from_dict(item) for item in data.get("operands", ())),
        )
        recipe.validate()
        return recipe

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"mode": self.mode}
        if self.score_name is not None:
            out["score_name"] = self.score_name
        if self.caption_field is not None:
            out["caption_field"] = self.caption_field
        if self.fraction is not None:
            out["fraction"] = str(self.fraction)  # exact, e.g. "1/5"
        if self.language_restriction is not None:
            out["language_restriction"] = self.language_restriction
        if self.operands:
            out["operands"] = [operand.to_dict() for operand in self.operands]
        return out
