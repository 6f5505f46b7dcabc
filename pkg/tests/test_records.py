"""Domain-type invariants and record validation."""

import math
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curate.errors import ValidationError
from curate.records import (
    CompositionRecipe,
    MetadataRecord,
    Pool,
    as_fraction,
    record_sort_key,
    validate_pool,
    validate_record,
)


def rec(uid="00ff00ff00ff00ff00ff00ff00ff00ff", **kwargs):
    defaults = dict(raw_caption="a caption")
    defaults.update(kwargs)
    return MetadataRecord(uid=uid, **defaults)


class TestValidateRecord:
    def test_valid_record_ok(self):
        assert validate_record(rec(scores={"dfn_raw": 0.31})) == []

    def test_score_out_of_range(self):
        violations = validate_record(rec(scores={"dfn_raw": 1.5}))
        assert [v.field for v in violations] == ["scores"]
        assert "out of [-1, 1]" in violations[0].message

    def test_short_uid_rejected(self):
        violations = validate_record(rec(uid="00ff00ff00ff00ff00ff00ff00ff00f"))
        assert [v.field for v in violations] == ["uid"]

    def test_uppercase_uid_rejected(self):
        assert validate_record(rec(uid="00FF00FF00FF00FF00FF00FF00FF00FF"))

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), float("-inf")])
    def test_non_finite_scores_rejected_not_clamped(self, bad):
        violations = validate_record(rec(scores={"s": bad}))
        assert [v.field for v in violations] == ["scores"]
        assert "finite" in violations[0].message

    def test_negative_embedding_ref(self):
        violations = validate_record(rec(embedding_refs={"image": -1}))
        assert [v.field for v in violations] == ["embedding_refs"]

    def test_language_required_with_translation(self):
        violations = validate_record(rec(translated_caption="hello"))
        assert [v.field for v in violations] == ["language"]

    def test_caption_source_must_be_populated(self):
        violations = validate_record(rec(caption_source="translated"))
        assert [v.field for v in violations] == ["caption_source"]


VIOLATION_INJECTORS = {
    "uid": lambda r: replace(r, uid=r.uid[:-1] + "G"),
    "scores": lambda r: replace(r, scores={**r.scores, "bad": 2.0}),
    "embedding_refs": lambda r: replace(r, embedding_refs={**r.embedding_refs, "bad": -3}),
    "language": lambda r: replace(r, language=None, translated_caption="t"),
    "caption_source": lambda r: replace(r, caption_source="backtranslated"),
}


@settings(max_examples=100, deadline=None)
@given(
    uid_seed=st.integers(0, 2**128 - 1),
    score=st.floats(-1.0, 1.0, allow_nan=False),
    ref=st.integers(0, 10**6),
    field=st.sampled_from(sorted(VIOLATION_INJECTORS)),
)
def test_one_injected_violation_is_named_exactly(uid_seed, score, ref, field):
    base = MetadataRecord(
        uid=f"{uid_seed:032x}"[-32:],
        raw_caption="ok",
        language="eng_Latn",
        translated_caption="ok",
        scores={"s": score},
        embedding_refs={"image": ref},
    )
    assert validate_record(base) == []
    broken = VIOLATION_INJECTORS[field](base)
    violations = validate_record(broken)
    assert [v.field for v in violations] == [field]


class TestPool:
    def test_from_records_sorts_by_uid(self):
        a, b = rec(uid="b" * 32), rec(uid="a" * 32)
        pool = Pool.from_records([a, b])
        assert [r.uid for r in pool.iter_records()] == ["a" * 32, "b" * 32]

    def test_single_copy_rejects_duplicates(self):
        with pytest.raises(ValidationError, match="duplicate uid"):
            Pool.from_records([rec(), rec()])

    def test_multiset_allows_two_copies_raw_first(self):
        translated = rec(language="eng_Latn", translated_caption="t", caption_source="translated")
        pool = Pool.from_records([translated, rec()], multiset=True)
        sources = [r.caption_source for r in pool.iter_records()]
        assert sources == ["raw", "translated"]

    def test_multiset_caps_at_two_copies(self):
        with pytest.raises(ValidationError, match="more than twice"):
            Pool.from_records([rec(), rec(), rec()], multiset=True)

    def test_validate_pool_passes_on_valid(self):
        pool = Pool.from_records([rec(uid="a" * 32), rec(uid="b" * 32)])
        validate_pool(pool)

    def test_sort_key_is_total_order(self):
        raw = rec()
        translated = rec(language="eng_Latn", translated_caption="t", caption_source="translated")
        assert record_sort_key(raw) < record_sort_key(translated)

    def test_len_and_records(self):
        pool = Pool.from_records([rec(uid="a" * 32), rec(uid="b" * 32)])
        assert len(pool) == 2
        assert len(pool.records()) == 2


class TestFraction:
    def test_decimal_strings_are_exact(self):
        assert as_fraction("0.2") == Fraction(1, 5)
        assert as_fraction(0.3) == Fraction(3, 10)
        assert as_fraction(1.0) == 1

    @pytest.mark.parametrize("bad", [0, 0.0, -0.5, 1.5, "2"])
    def test_out_of_range_rejected(self, bad):
        with pytest.raises(ValidationError):
            as_fraction(bad)


class TestRecipe:
    def test_filter_requires_score_and_fraction(self):
        with pytest.raises(ValidationError):
            CompositionRecipe(mode="filter", score_name="s").validate()
        with pytest.raises(ValidationError):
            CompositionRecipe(mode="filter", fraction=Fraction(1, 5)).validate()

    def test_union_requires_two_operands(self):
        child = CompositionRecipe(mode="filter", score_name="s", fraction=Fraction(1, 5))
        with pytest.raises(ValidationError):
            CompositionRecipe(mode="union", operands=(child,)).validate()
        CompositionRecipe(mode="union", operands=(child, child)).validate()

    def test_replace_requires_operand_and_field(self):
        child = CompositionRecipe(mode="filter", score_name="s", fraction=Fraction(1, 5))
        with pytest.raises(ValidationError):
            CompositionRecipe(mode="replace-caption", operands=(child,)).validate()
        CompositionRecipe(
            mode="replace-caption", caption_field="translated", operands=(child,)
        ).validate()

    def test_dict_round_trip(self):
        recipe = CompositionRecipe.from_dict(
            {
                "mode": "concat",
                "operands": [
                    {"mode": "filter", "score_name": "dfn_raw", "fraction": "0.2", "caption_field": "raw"},
                    {
                        "mode": "filter",
                        "score_name": "dfn_translated",
                        "fraction": 0.2,
                        "caption_field": "translated",
                    },
                ],
            }
        )
        assert recipe.operands[0].fraction == Fraction(1, 5)
        assert recipe.operands[1].fraction == Fraction(1, 5)
        assert CompositionRecipe.from_dict(recipe.to_dict()) == recipe

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValidationError, match="unknown recipe keys"):
            CompositionRecipe.from_dict({"mode": "filter", "frac": 0.2})
