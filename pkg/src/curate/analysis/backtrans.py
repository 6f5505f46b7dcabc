"""Back-translation quality: cosine similarity between sentence embeddings of
an original caption and its round-trip translation, aggregated per language.

Languages with fewer than ``min_samples`` pairs are excluded from the
per-language means (their counts are still reported); the overall mean covers
every pair. Means use exactly rounded summation, so results are invariant
under permutation of the input pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable

from ..errors import OperationError
from ..scoring import cosine

DEFAULT_MIN_SAMPLES = 30


@dataclass(frozen=True)
class BacktransReport:
    per_language_mean: dict[str, float]
    per_language_count: dict[str, int]
    overall_mean: float
    min_samples_per_language: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "overall_mean": self.overall_mean,
            "min_samples_per_language": self.min_samples_per_language,
            "per_language_count": {
                lang: self.per_language_count[lang] for lang in sorted(self.per_language_count)
            },
            "per_language_mean": {
                lang: self.per_language_mean[lang] for lang in sorted(self.per_language_mean)
            },
        }


def backtranslation_quality(
    pairs: Iterable[tuple], min_samples: int = DEFAULT_MIN_SAMPLES
) -> BacktransReport:
    """Aggregate cosine(original, backtranslated) over (vector, vector, language)
    triples."""
    if min_samples < 1:
        raise OperationError("min_samples must be positive")
    by_language: dict[str, list[float]] = {}
    all_cosines: list[float] = []
    for item in pairs:
        try:
            original, backtranslated, language = item
        except (TypeError, ValueError):
            raise OperationError(
                "each pair must be (original_embedding, backtranslated_embedding, language)"
            ) from None
        value = cosine(original, backtranslated)
        all_cosines.append(value)
        by_language.setdefault(language, []).append(value)
    if not all_cosines:
        raise OperationError("empty input: no pairs")
    per_language_count = {lang: len(values) for lang, values in by_language.items()}
    per_language_mean = {
        lang: math.fsum(values) / len(values)
        for lang, values in by_language.items()
        if len(values) >= min_samples
    }
    return BacktransReport(
        per_language_mean=per_language_mean,
        per_language_count=per_language_count,
        overall_mean=math.fsum(all_cosines) / len(all_cosines),
        min_samples_per_language=min_samples,
    )
