"""Language composition, overlap, and share-delta accounting."""

import math

import pytest

from curate.errors import OperationError
from curate.poolstats import (
    CompositionStats,
    composition_delta,
    language_composition,
    overlap,
)
from curate.records import MetadataRecord, Pool
from fixtures import make_uid


def pool_with_languages(langs, prefix=""):
    records = [
        MetadataRecord(uid=make_uid(f"{prefix}{i}"), raw_caption="x", language=lang)
        for i, lang in enumerate(langs)
    ]
    return Pool.from_records(records)


def pool_with_uids(tokens, lang="eng_Latn"):
    return Pool.from_records(
        [MetadataRecord(uid=make_uid(t), raw_caption="x", language=lang) for t in tokens]
    )


class TestLanguageComposition:
    def test_brute_force_count(self):
        langs = ["eng_Latn"] * 4 + ["jpn_Jpan"] * 3 + ["fra_Latn"] * 3
        stats = language_composition(pool_with_languages(langs))
        assert stats.total == 10
        assert stats.english_count == 4
        assert stats.non_english_count == 6
        assert stats.per_language_counts == {"eng_Latn": 4, "jpn_Jpan": 3, "fra_Latn": 3}

    def test_all_english(self):
        stats = language_composition(pool_with_languages(["eng_Latn"] * 5))
        assert stats.non_english_count == 0

    def test_counts_sum_to_total(self):
        langs = ["eng_Latn", "deu_Latn", "deu_Latn", "tur_Latn"]
        stats = language_composition(pool_with_languages(langs))
        assert sum(stats.per_language_counts.values()) == stats.total
        assert stats.english_count + stats.non_english_count == stats.total

    def test_missing_language_names_uid(self):
        bad = MetadataRecord(uid=make_uid("bad"), raw_caption="x")
        pool = Pool.from_records([bad])
        with pytest.raises(OperationError, match=f"record {bad.uid} missing language"):
            language_composition(pool)

    def test_thread_counts_agree(self, tmp_path):
        from curate.shardio import read_pool, write_pool

        langs = ["eng_Latn", "jpn_Jpan", "fra_Latn"] * 40
        write_pool(pool_with_languages(langs), tmp_path, shard_size=13)
        sharded = read_pool(tmp_path)
        results = [language_composition(sharded, threads=t) for t in (1, 4)]
        assert results[0] == results[1]


class TestOverlap:
    def test_enumerated(self):
        count, _ = overlap(pool_with_uids(["a", "b", "c"]), pool_with_uids(["b", "c", "d"]))
        assert count == 2

    def test_disjoint(self):
        count, per_lang = overlap(pool_with_uids(["a"]), pool_with_uids(["b"]))
        assert count == 0
        assert per_lang == {}

    def test_symmetric_and_self(self):
        left = pool_with_uids(["a", "b", "c"])
        right = pool_with_uids(["b", "d"])
        assert overlap(left, right)[0] == overlap(right, left)[0]
        assert overlap(left, left)[0] == 3

    def test_language_breakdown(self):
        left = Pool.from_records(
            [
                MetadataRecord(uid=make_uid("a"), raw_caption="x", language="eng_Latn"),
                MetadataRecord(uid=make_uid("b"), raw_caption="x", language="jpn_Jpan"),
            ]
        )
        right = pool_with_uids(["a", "b"], lang="eng_Latn")
        count, per_lang = overlap(left, right)
        assert count == 2
        assert per_lang == {"eng_Latn": 1, "jpn_Jpan": 1}

    def test_multiset_rejected(self):
        rec = MetadataRecord(
            uid=make_uid("m"), raw_caption="x", language="eng_Latn",
            translated_caption="t", caption_source="translated",
        )
        multi = Pool.from_records(
            [MetadataRecord(uid=make_uid("m"), raw_caption="x", language="eng_Latn"), rec],
            multiset=True,
        )
        with pytest.raises(OperationError, match="multiset"):
            overlap(multi, pool_with_uids(["a"]))


def stats_of(counts):
    total = sum(counts.values())
    english = counts.get("eng_Latn", 0)
    return CompositionStats(
        total=total,
        per_language_counts=dict(counts),
        english_count=english,
        non_english_count=total - english,
    )


class TestCompositionDelta:
    def test_hand_arithmetic(self):
        before = stats_of({"eng_Latn": 50, "fra_Latn": 50})
        after = stats_of({"eng_Latn": 25, "fra_Latn": 75})
        deltas = composition_delta(before, after)
        assert deltas == {"fra_Latn": 25.0, "eng_Latn": -25.0}

    def test_identical_stats_all_zero(self):
        stats = stats_of({"eng_Latn": 3, "deu_Latn": 7})
        assert all(v == 0.0 for v in composition_delta(stats, stats).values())

    def test_single_language_zero(self):
        before = stats_of({"tur_Latn": 5})
        after = stats_of({"tur_Latn": 9})
        assert composition_delta(before, after) == {"tur_Latn": 0.0}

    def test_sorted_by_absolute_magnitude(self):
        before = stats_of({"a_X": 10, "b_X": 10, "c_X": 80})
        after = stats_of({"a_X": 30, "b_X": 5, "c_X": 65})
        deltas = composition_delta(before, after)
        magnitudes = [abs(v) for v in deltas.values()]
        assert magnitudes == sorted(magnitudes, reverse=True)

    def test_deltas_sum_to_zero(self):
        before = stats_of({"a_X": 13, "b_X": 7, "c_X": 11, "d_X": 31})
        after = stats_of({"a_X": 3, "b_X": 17, "e_X": 19})
        assert math.fsum(composition_delta(before, after).values()) == pytest.approx(0, abs=1e-9)

    def test_zero_total_rejected(self):
        with pytest.raises(OperationError, match="positive totals"):
            composition_delta(stats_of({}), stats_of({"a_X": 1}))
