import pytest
from hypothesis import given
from hypothesis import strategies as st

from squint.core import (
    AnswerSet,
    MatchMode,
    MissingAnnotatorDataError,
    is_binary,
    match_answers,
    normalize_answer,
)
from tests.conftest import make_question


class TestNormalizeAnswer:
    def test_case_and_trim(self):
        assert normalize_answer("Yellow ") == "yellow"

    def test_leading_article(self):
        assert normalize_answer("a banana") == "banana"

    def test_digit_word(self):
        assert normalize_answer("Two") == "2"

    def test_empty(self):
        assert normalize_answer("") == ""

    def test_punctuation_and_whitespace(self):
        assert normalize_answer("  the   red  car! ") == "red car"

    @given(st.text(max_size=40))
    def test_idempotent(self, s):
        once = normalize_answer(s)
        assert normalize_answer(once) == once


class TestMatchAnswers:
    def test_exact_perfect_agreement(self):
        gt = AnswerSet.from_raw(["yes"] * 10)
        assert match_answers("yes", gt, MatchMode.EXACT) == 1.0

    def test_soft_partial(self):
        raw = ["green", "green"] + ["blue"] * 8
        gt = AnswerSet.from_raw(raw)
        assert match_answers("green", gt, MatchMode.VQA_SOFT) == pytest.approx(2 / 3)

    def test_exact_mismatch_case_insensitive(self):
        gt = AnswerSet.from_single("yellow")
        assert match_answers("Green", gt, MatchMode.EXACT) == 0.0

    def test_soft_requires_raw(self):
        gt = AnswerSet.from_single("yes")
        with pytest.raises(MissingAnnotatorDataError):
            match_answers("yes", gt, MatchMode.VQA_SOFT)

    def test_empty_pred_rejected(self):
        with pytest.raises(ValueError):
            match_answers("", AnswerSet.from_single("yes"))

    def test_exact_invariant_under_normalization(self):
        gt = AnswerSet.from_single("banana")
        assert match_answers("A Banana", gt) == match_answers("banana", gt)

    @given(st.integers(min_value=0, max_value=10))
    def test_soft_monotone_and_saturating(self, k):
        raw = ["red"] * k + [f"filler{i}" for i in range(10 - k)]
        gt = AnswerSet(majority_answer="red", raw_answers=tuple(raw))
        score = match_answers("red", gt, MatchMode.VQA_SOFT)
        assert score == pytest.approx(min(k / 3, 1.0))
        if k >= 3:
            assert score == 1.0


class TestAnswerSet:
    def test_majority_modal(self):
        gt = AnswerSet.from_raw(["Yes", "yes", "no", "yes"])
        assert gt.majority_answer == "yes"
        assert gt.modal_count() == 3

    def test_tie_broken_lexicographically(self):
        gt = AnswerSet.from_raw(["red", "blue"])
        assert gt.majority_answer == "blue"

    def test_is_binary(self):
        assert make_question(1, "Is it red?", "yes").answers.is_binary
        assert not make_question(2, "What color?", "green").answers.is_binary

    def test_is_binary_pre_normalization(self):
        q = make_question(3, "Is it wet?", "", raw=["No"] * 10)
        assert is_binary(q)
