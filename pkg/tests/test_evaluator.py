import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from squint.core import (
    AttentionLayoutError,
    AttentionMap,
    MatchMode,
    PredictionRecord,
    SubQuestionLink,
)
from squint.evaluator import (
    EmptyReportError,
    NoBinarySubsError,
    PairOutcome,
    Quadrant,
    UndefinedCorrelationError,
    all_sub_wrong_rate,
    analyze,
    attention_correlation,
    balanced_consistency,
    compute_pair_outcomes,
    concept_overlap,
    consistency_pct,
    evaluate_pairs,
    first_words_distribution,
    length_distribution,
    quadrant_of,
)
from tests.conftest import make_question


def outcome(main_id, sub_id, main_ok, sub_ok, sub_gt="yes"):
    return PairOutcome(
        main_question_id=main_id,
        sub_question_id=sub_id,
        main_correct=main_ok,
        sub_correct=sub_ok,
        quadrant=quadrant_of(main_ok, sub_ok),
        sub_gt_answer=sub_gt,
    )


class TestQuadrants:
    def test_mapping(self):
        assert quadrant_of(True, True) is Quadrant.Q1
        assert quadrant_of(True, False) is Quadrant.Q2
        assert quadrant_of(False, True) is Quadrant.Q3
        assert quadrant_of(False, False) is Quadrant.Q4

    def test_consistency_oracle(self):
        # 5005 Q1 and 1973 Q2 should give 100*5005/6978 = 71.725...
        pairs = [outcome(i, i, True, True) for i in range(5005)]
        pairs += [outcome(10000 + i, 10000 + i, True, False) for i in range(1973)]
        assert consistency_pct(pairs) == pytest.approx(71.7254, abs=1e-3)

    def test_consistency_undefined_without_main_correct(self):
        with pytest.raises(EmptyReportError):
            consistency_pct([outcome(1, 1, False, True)])

    @given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=50))
    def test_pct_sums_to_100(self, flags):
        pairs = [outcome(i, i, m, s) for i, (m, s) in enumerate(flags)]
        questions = {
            i: make_question(i, "Is it ripe?", "yes") for i in range(len(flags))
        }
        main_preds = {
            i: PredictionRecord(i, "yes" if m else "no") for i, (m, _) in enumerate(flags)
        }
        sub_preds = {
            i: PredictionRecord(i, "yes" if s else "no") for i, (_, s) in enumerate(flags)
        }
        links = [SubQuestionLink(i, i, "Is it soft?", "yes") for i in range(len(flags))]
        report = evaluate_pairs(main_preds, sub_preds, links, questions)
        assert sum(report.pct.values()) == pytest.approx(100.0)
        assert sum(report.counts.values()) == report.n_pairs == len(flags)


class TestAttentionCorrelation:
    def test_identical_maps(self):
        a = AttentionMap(weights=(0.1, 0.2, 0.7), n_boxes=3)
        assert attention_correlation(a, a) == pytest.approx(1.0)

    def test_anticorrelated(self):
        a = AttentionMap(weights=(0.0, 1.0), n_boxes=2)
        b = AttentionMap(weights=(1.0, 0.0), n_boxes=2)
        assert attention_correlation(a, b) == pytest.approx(-1.0)

    def test_constant_vector_raises(self):
        a = AttentionMap(weights=(0.5, 0.5), n_boxes=2)
        b = AttentionMap(weights=(0.1, 0.9), n_boxes=2)
        with pytest.raises(UndefinedCorrelationError):
            attention_correlation(a, b)

    def test_layout_mismatch(self):
        a = AttentionMap(weights=(0.5, 0.5), n_boxes=2)
        b = AttentionMap(weights=(0.2, 0.3, 0.5), n_boxes=3)
        with pytest.raises(AttentionLayoutError):
            attention_correlation(a, b)

    def test_matches_numpy_corrcoef(self):
        rng = np.random.default_rng(3)
        x = rng.random(10)
        y = rng.random(10)
        a = AttentionMap(weights=tuple(x), n_boxes=10)
        b = AttentionMap(weights=tuple(y), n_boxes=10)
        assert attention_correlation(a, b) == pytest.approx(np.corrcoef(x, y)[0, 1])


class TestComputePairOutcomes:
    def _setup(self):
        questions = {1: make_question(1, "Is the banana ripe enough to eat?", "yes")}
        links = [SubQuestionLink(1, 10, "What color is the banana?", "yellow")]
        main_preds = {1: PredictionRecord(1, "yes")}
        sub_preds = {10: PredictionRecord(10, "Yellow")}
        return main_preds, sub_preds, links, questions

    def test_q1_pair(self):
        pairs, n_missing, _ = compute_pair_outcomes(*self._setup())
        assert n_missing == 0
        assert pairs[0].quadrant is Quadrant.Q1
        assert pairs[0].sub_gt_answer == "yellow"

    def test_missing_prediction_counted(self):
        main_preds, _, links, questions = self._setup()
        pairs, n_missing, _ = compute_pair_outcomes(main_preds, {}, links, questions)
        assert pairs == []
        assert n_missing == 1

    def test_sub_always_exact_even_in_soft_mode(self):
        main_preds, sub_preds, links, questions = self._setup()
        # soft mode needs raw annotator answers for the main question
        questions[1] = make_question(
            1, "Is the banana ripe enough to eat?", "", raw=["yes"] * 10
        )
        sub_preds[10] = PredictionRecord(10, "greenish yellow")
        pairs, _, _ = compute_pair_outcomes(
            main_preds, sub_preds, links, questions, MatchMode.VQA_SOFT
        )
        assert not pairs[0].sub_correct

    def test_undefined_corr_skipped_not_fatal(self):
        main_preds, sub_preds, links, questions = self._setup()
        flat = AttentionMap(weights=(0.5, 0.5), n_boxes=2)
        peaked = AttentionMap(weights=(0.9, 0.1), n_boxes=2)
        main_preds[1] = PredictionRecord(1, "yes", flat)
        sub_preds[10] = PredictionRecord(10, "yellow", peaked)
        pairs, _, n_skipped = compute_pair_outcomes(main_preds, sub_preds, links, questions)
        assert n_skipped == 1
        assert pairs[0].attn_corr is None


class TestAggregates:
    def test_reasoning_accuracy_counts_mains_once(self):
        questions = {
            1: make_question(1, "Is it ripe?", "yes"),
            2: make_question(2, "Is it fresh?", "yes"),
        }
        links = [
            SubQuestionLink(1, 10, "a?", "x"),
            SubQuestionLink(1, 11, "b?", "y"),
            SubQuestionLink(1, 12, "c?", "z"),
            SubQuestionLink(2, 13, "d?", "w"),
        ]
        main_preds = {1: PredictionRecord(1, "yes"), 2: PredictionRecord(2, "no")}
        sub_preds = {i: PredictionRecord(i, "nope") for i in (10, 11, 12, 13)}
        report = evaluate_pairs(main_preds, sub_preds, links, questions)
        # main 1 correct, main 2 wrong: 50%, not weighted by its 3 links
        assert report.reasoning_accuracy_pct == pytest.approx(50.0)

    def test_all_sub_wrong_rate(self):
        pairs = [
            outcome(1, 10, True, False),
            outcome(1, 11, True, False),  # main 1: every sub wrong
            outcome(2, 12, True, True),
            outcome(2, 13, True, False),  # main 2: one sub right
            outcome(3, 14, False, False),  # main 3 wrong: excluded
        ]
        assert all_sub_wrong_rate(pairs) == pytest.approx(50.0)

    def test_all_sub_wrong_no_correct_mains(self):
        assert all_sub_wrong_rate([outcome(1, 10, False, False)]) == 0.0


class TestBalancedConsistency:
    def test_closed_form_fixture(self):
        # 30 yes-class Q1 pairs and 10 no-class Q2 pairs: every resample keeps
        # all 10 no pairs plus 10 of the interchangeable yes pairs, so
        # consistency is exactly 10/(10+10) = 50% with zero variance.
        pairs = [outcome(i, i, True, True, "yes") for i in range(30)]
        pairs += [outcome(100 + i, 100 + i, True, False, "no") for i in range(10)]
        mean, std = balanced_consistency(pairs, seed=0)
        assert mean == pytest.approx(50.0)
        assert std == pytest.approx(0.0)

    def test_deterministic_in_seed(self):
        rng = np.random.default_rng(7)
        pairs = [
            outcome(i, i, True, bool(rng.integers(2)), "yes" if rng.integers(2) else "no")
            for i in range(40)
        ]
        assert balanced_consistency(pairs, seed=5) == balanced_consistency(pairs, seed=5)

    def test_needs_both_classes(self):
        with pytest.raises(NoBinarySubsError):
            balanced_consistency([outcome(1, 1, True, True, "yes")])

    def test_needs_binary_subs(self):
        with pytest.raises(NoBinarySubsError):
            balanced_consistency([outcome(1, 1, True, True, "yellow")])


class TestEvaluatePairs:
    def test_empty_raises(self):
        with pytest.raises(EmptyReportError):
            evaluate_pairs({}, {}, [], {})

    def test_report_round_trip_fields(self):
        questions = {1: make_question(1, "Is it ripe?", "yes")}
        links = [
            SubQuestionLink(1, 10, "Is it yellow?", "yes"),
            SubQuestionLink(1, 11, "Is it green?", "no"),
        ]
        main_preds = {1: PredictionRecord(1, "yes")}
        sub_preds = {10: PredictionRecord(10, "yes"), 11: PredictionRecord(11, "no")}
        report = evaluate_pairs(main_preds, sub_preds, links, questions, seed=3)
        d = report.to_dict()
        assert d["schema_version"] == "1"
        assert d["counts"]["q1"] == 2
        assert d["consistency_pct"] == 100.0
        assert d["balanced_consistency_pct"] == 100.0
        assert d["seed"] == 3

    def test_overall_accuracy(self):
        questions = {1: make_question(1, "Is it ripe?", "yes")}
        links = [SubQuestionLink(1, 10, "Is it yellow?", "yes")]
        main_preds = {1: PredictionRecord(1, "yes")}
        sub_preds = {10: PredictionRecord(10, "yes")}
        overall_q = {
            5: make_question(5, "Is it wet?", "no"),
            6: make_question(6, "Is it dry?", "yes"),
        }
        overall_p = {5: PredictionRecord(5, "no"), 6: PredictionRecord(6, "no")}
        report = evaluate_pairs(
            main_preds, sub_preds, links, questions,
            overall_preds=overall_p, overall_questions=overall_q,
        )
        assert report.overall_accuracy_pct == pytest.approx(50.0)


class TestAnalytics:
    def test_length_distribution(self):
        hist = length_distribution(["How many dogs?", "Is it red?", "Where is it?"])
        assert set(hist) == {3}
        assert hist[3] == pytest.approx(100.0)
        assert sum(hist.values()) == pytest.approx(100.0)

    def test_first_words_tree(self):
        tree = first_words_distribution(["Is it red?", "Is it blue?", "How many?"], depth=2)
        assert tree["is"]["count"] == 2
        assert tree["is"]["children"]["it"]["count"] == 2
        assert tree["how"]["count"] == 1

    def test_concept_overlap(self):
        questions = {
            1: make_question(1, "Is the banana ripe enough to eat?", "yes"),
            2: make_question(2, "Is the soup too salty?", "no"),
        }
        links = [
            SubQuestionLink(1, 10, "What color is the banana?", "yellow"),
            SubQuestionLink(2, 11, "Is the man wearing a hat?", "yes"),
        ]
        assert concept_overlap(links, questions) == pytest.approx(50.0)

    def test_concept_overlap_empty_raises(self):
        with pytest.raises(EmptyReportError):
            concept_overlap([], {})

    def test_analyze_report(self):
        questions = {1: make_question(1, "Is the banana ripe enough to eat?", "yes")}
        links = [SubQuestionLink(1, 10, "What color is the banana?", "yellow")]
        d = analyze(questions, links).to_dict()
        assert d["concept_overlap_pct"] == 100.0
        assert d["length_histogram"] == {"7": 100.0}
        assert "is" in d["first_words_tree"]

    def test_analyze_without_links(self):
        d = analyze({1: make_question(1, "Is it red?", "yes")}, []).to_dict()
        assert d["concept_overlap_pct"] is None
