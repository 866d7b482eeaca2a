from hypothesis import given
from hypothesis import strategies as st

from squint.chunker import chunk_token_set, extract_noun_chunks, fold_plural


class TestExtractNounChunks:
    def test_single_noun(self):
        assert extract_noun_chunks("Is the banana ripe enough to eat?") == ["banana"]

    def test_question_word_not_a_chunk(self):
        assert extract_noun_chunks("What color is the banana?") == ["color", "banana"]

    def test_gerund_treated_as_noun(self):
        assert extract_noun_chunks("Is the airplane taking off or landing?") == [
            "airplane",
            "landing",
        ]

    def test_plural_subject(self):
        assert extract_noun_chunks("Are the wheels out?") == ["wheels"]

    def test_determiner_stripped(self):
        chunks = extract_noun_chunks("Is there a red car?")
        assert chunks == ["red car"]

    def test_empty_text(self):
        assert extract_noun_chunks("") == []

    def test_no_nouns(self):
        assert extract_noun_chunks("Is it?") == []


class TestFoldPlural:
    def test_plural_folded(self):
        assert fold_plural("wheels") == "wheel"

    def test_short_word_kept(self):
        assert fold_plural("gas") == "gas"

    def test_non_plural_untouched(self):
        assert fold_plural("banana") == "banana"

    @given(st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=12))
    def test_idempotent_up_to_one_s(self, w):
        folded = fold_plural(w)
        assert not (len(folded) > 3 and folded.endswith("s") and len(w) > 3)


class TestChunkTokenSet:
    def test_shared_concept_overlaps(self):
        main = chunk_token_set("Is the banana ripe enough to eat?")
        sub = chunk_token_set("What color is the banana?")
        assert "banana" in (main & sub)

    def test_plural_folding_unifies(self):
        assert chunk_token_set("Are the wheels out?") & chunk_token_set(
            "Is the wheel round?"
        )

    def test_disjoint_questions(self):
        assert not (
            chunk_token_set("Is the soup too salty?")
            & chunk_token_set("Is the man wearing a hat?")
        )

    def test_case_insensitive(self):
        assert chunk_token_set("IS THE BANANA RIPE?") == chunk_token_set(
            "is the banana ripe?"
        )
