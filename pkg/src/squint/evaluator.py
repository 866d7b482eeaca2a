"""Consistency metrics over (main question, sub-question) pairs.

Every evaluated pair lands in one of four quadrants:

* Q1 both main and sub correct
* Q2 main correct, sub wrong
* Q3 main wrong, sub correct
* Q4 both wrong

Consistency is Q1 / (Q1 + Q2): how often the sub-question is right when the
main question is. Also here: balanced consistency over binary sub-questions,
attention correlation, and corpus analytics (length histogram, first-words
tree, concept overlap).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .chunker import chunk_token_set
from .core import (
    AttentionLayoutError,
    AttentionMap,
    DomainError,
    MatchMode,
    PredictionRecord,
    QuestionRecord,
    SubQuestionLink,
    is_correct,
    normalize_answer,
)
from .rules import tokenize_words


class EmptyReportError(DomainError):
    """No evaluable pairs were found."""


class UndefinedCorrelationError(DomainError):
    """Correlation requested with a zero-variance attention vector."""


class NoBinarySubsError(DomainError):
    """Balanced consistency needs at least one yes/no sub-question."""


class Quadrant(str, Enum):
    Q1 = "q1"  # main correct, sub correct
    Q2 = "q2"  # main correct, sub wrong
    Q3 = "q3"  # main wrong, sub correct
    Q4 = "q4"  # main wrong, sub wrong


def quadrant_of(main_correct: bool, sub_correct: bool) -> Quadrant:
    if main_correct:
        return Quadrant.Q1 if sub_correct else Quadrant.Q2
    return Quadrant.Q3 if sub_correct else Quadrant.Q4


@dataclass(frozen=True)
class PairOutcome:
    main_question_id: int
    sub_question_id: int
    main_correct: bool
    sub_correct: bool
    quadrant: Quadrant
    sub_gt_answer: str = ""
    attn_corr: Optional[float] = None


@dataclass
class QuadrantReport:
    counts: dict[str, int]
    pct: dict[str, float]
    consistency_pct: float
    reasoning_accuracy_pct: float
    all_sub_wrong_pct: float
    balanced_consistency_pct: Optional[float] = None
    balanced_consistency_std: Optional[float] = None
    overall_accuracy_pct: Optional[float] = None
    attn_corr_mean: Optional[float] = None
    attn_corr_skipped: int = 0
    n_pairs: int = 0
    n_missing_predictions: int = 0
    match_mode: str = MatchMode.EXACT.value
    seed: Optional[int] = None
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def r2(x: Optional[float]) -> Optional[float]:
            return None if x is None else round(x, 2)

        return {
            "schema_version": "1",
            "counts": dict(self.counts),
            "pct": {k: r2(v) for k, v in self.pct.items()},
            "consistency_pct": r2(self.consistency_pct),
            "balanced_consistency_pct": r2(self.balanced_consistency_pct),
            "balanced_consistency_std": r2(self.balanced_consistency_std),
            "reasoning_accuracy_pct": r2(self.reasoning_accuracy_pct),
            "overall_accuracy_pct": r2(self.overall_accuracy_pct),
            "all_sub_wrong_pct": r2(self.all_sub_wrong_pct),
            "attn_corr_mean": None
            if self.attn_corr_mean is None
            else round(self.attn_corr_mean, 4),
            "attn_corr_skipped": self.attn_corr_skipped,
            "n_pairs": self.n_pairs,
            "n_missing_predictions": self.n_missing_predictions,
            "match_mode": self.match_mode,
            "seed": self.seed,
            "metadata": dict(self.metadata),
        }


def attention_correlation(a_main: AttentionMap, a_sub: AttentionMap) -> float:
    """Pearson correlation of two flattened attention weight vectors."""
    if a_main.layout != a_sub.layout:
        raise AttentionLayoutError(
            f"layout mismatch: {a_main.layout} vs {a_sub.layout}"
        )
    x = a_main.as_array()
    y = a_sub.as_array()
    sx = x.std()
    sy = y.std()
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelationError("constant attention vector")
    return float(np.mean((x - x.mean()) * (y - y.mean())) / (sx * sy))


def compute_pair_outcomes(
    main_preds: Mapping[int, PredictionRecord],
    sub_preds: Mapping[int, PredictionRecord],
    links: Sequence[SubQuestionLink],
    questions: Mapping[int, QuestionRecord],
    mode: MatchMode = MatchMode.EXACT,
) -> tuple[list[PairOutcome], int, int]:
    """One outcome per link with both predictions present.

    Returns (outcomes, n_missing_predictions, n_attn_skipped). Main-question
    correctness uses the requested match mode against the question's answer
    set; sub-questions always use exact matching against the single linked
    ground-truth answer.
    """
    outcomes: list[PairOutcome] = []
    n_missing = 0
    n_attn_skipped = 0
    mode = MatchMode(mode)
    for link in links:
        mp = main_preds.get(link.main_question_id)
        sp = sub_preds.get(link.sub_question_id)
        q = questions.get(link.main_question_id)
        if mp is None or sp is None or q is None:
            n_missing += 1
            continue
        main_ok = is_correct(mp.predicted_answer, q.answers, mode)
        sub_ok = normalize_answer(sp.predicted_answer) == normalize_answer(
            link.sub_answer
        )
        corr: Optional[float] = None
        if mp.attention is not None and sp.attention is not None:
            try:
                corr = attention_correlation(mp.attention, sp.attention)
            except UndefinedCorrelationError:
                n_attn_skipped += 1
        outcomes.append(
            PairOutcome(
                main_question_id=link.main_question_id,
                sub_question_id=link.sub_question_id,
                main_correct=main_ok,
                sub_correct=sub_ok,
                quadrant=quadrant_of(main_ok, sub_ok),
                sub_gt_answer=normalize_answer(link.sub_answer),
                attn_corr=corr,
            )
        )
    return outcomes, n_missing, n_attn_skipped


def quadrant_counts(pairs: Iterable[PairOutcome]) -> dict[str, int]:
    counts = {q.value: 0 for q in Quadrant}
    for p in pairs:
        counts[p.quadrant.value] += 1
    return counts


def consistency_pct(pairs: Sequence[PairOutcome]) -> float:
    """100 * Q1 / (Q1 + Q2); requires at least one main-correct pair."""
    c = quadrant_counts(pairs)
    denom = c["q1"] + c["q2"]
    if denom == 0:
        raise EmptyReportError("no main-correct pairs; consistency undefined")
    return 100.0 * c["q1"] / denom


def reasoning_accuracy(
    main_preds: Mapping[int, PredictionRecord],
    links: Sequence[SubQuestionLink],
    questions: Mapping[int, QuestionRecord],
    mode: MatchMode = MatchMode.EXACT,
) -> float:
    """Accuracy over distinct main questions, each counted once."""
    main_ids = sorted({l.main_question_id for l in links})
    scored = []
    for mid in main_ids:
        mp = main_preds.get(mid)
        q = questions.get(mid)
        if mp is None or q is None:
            continue
        scored.append(is_correct(mp.predicted_answer, q.answers, mode))
    if not scored:
        raise EmptyReportError("no scorable main questions")
    return 100.0 * sum(scored) / len(scored)


def all_sub_wrong_rate(pairs: Sequence[PairOutcome]) -> float:
    """Of distinct main-correct mains, the fraction with every sub wrong."""
    by_main: dict[int, list[PairOutcome]] = {}
    for p in pairs:
        by_main.setdefault(p.main_question_id, []).append(p)
    correct_mains = [ps for ps in by_main.values() if ps[0].main_correct]
    if not correct_mains:
        return 0.0
    n_all_wrong = sum(1 for ps in correct_mains if not any(p.sub_correct for p in ps))
    return 100.0 * n_all_wrong / len(correct_mains)


def balanced_consistency(
    pairs: Sequence[PairOutcome],
    seed: int = 0,
    n_resamples: int = 100,
) -> tuple[float, float]:
    """Consistency after balancing the yes/no ground truth of sub-questions.

    The majority ground-truth class is subsampled (without replacement) to
    the minority size with a seeded generator; consistency is computed per
    resample and the (mean, std) over resamples is returned. Deterministic
    in (pairs, seed, n_resamples).
    """
    binary = [p for p in pairs if p.sub_gt_answer in ("yes", "no")]
    if not binary:
        raise NoBinarySubsError("no binary-answer sub-questions in the pair set")
    yes = [p for p in binary if p.sub_gt_answer == "yes"]
    no = [p for p in binary if p.sub_gt_answer == "no"]
    if not yes or not no:
        raise NoBinarySubsError("both yes and no ground-truth classes are required")
    minority, majority = (yes, no) if len(yes) <= len(no) else (no, yes)
    rng = np.random.default_rng(seed)
    values = []
    for _ in range(n_resamples):
        idx = rng.choice(len(majority), size=len(minority), replace=False)
        sample = minority + [majority[i] for i in idx]
        values.append(consistency_pct(sample))
    arr = np.asarray(values)
    return float(arr.mean()), float(arr.std())


def evaluate_pairs(
    main_preds: Mapping[int, PredictionRecord],
    sub_preds: Mapping[int, PredictionRecord],
    links: Sequence[SubQuestionLink],
    questions: Mapping[int, QuestionRecord],
    mode: MatchMode = MatchMode.EXACT,
    seed: int = 0,
    n_resamples: int = 100,
    overall_preds: Optional[Mapping[int, PredictionRecord]] = None,
    overall_questions: Optional[Mapping[int, QuestionRecord]] = None,
) -> QuadrantReport:
    """Full quadrant report over all evaluable (main, sub) pairs."""
    pairs, n_missing, n_attn_skipped = compute_pair_outcomes(
        main_preds, sub_preds, links, questions, mode
    )
    if not pairs:
        raise EmptyReportError("zero evaluable pairs")
    counts = quadrant_counts(pairs)
    n = len(pairs)
    pct = {k: 100.0 * v / n for k, v in counts.items()}
    denom = counts["q1"] + counts["q2"]
    cons = 100.0 * counts["q1"] / denom if denom else 0.0

    try:
        bal_mean, bal_std = balanced_consistency(pairs, seed=seed, n_resamples=n_resamples)
    except NoBinarySubsError:
        bal_mean = bal_std = None

    corrs = [p.attn_corr for p in pairs if p.attn_corr is not None]
    attn_mean = float(np.mean(corrs)) if corrs else None

    overall = None
    if overall_preds is not None and overall_questions is not None:
        scored = [
            is_correct(p.predicted_answer, overall_questions[qid].answers, mode)
            for qid, p in overall_preds.items()
            if qid in overall_questions
        ]
        if scored:
            overall = 100.0 * sum(scored) / len(scored)

    return QuadrantReport(
        counts=counts,
        pct=pct,
        consistency_pct=cons,
        balanced_consistency_pct=bal_mean,
        balanced_consistency_std=bal_std,
        reasoning_accuracy_pct=reasoning_accuracy(main_preds, links, questions, mode),
        overall_accuracy_pct=overall,
        all_sub_wrong_pct=all_sub_wrong_rate(pairs),
        attn_corr_mean=attn_mean,
        attn_corr_skipped=n_attn_skipped,
        n_pairs=n,
        n_missing_predictions=n_missing,
        match_mode=MatchMode(mode).value,
        seed=seed,
        metadata={
            "attention_correlation": "pearson over flattened grid+box weights, per-pair mean",
            "balancing": f"seeded subsample of majority gt class, {n_resamples} resamples",
        },
    )


# --- corpus analytics ---


@dataclass
class AnalysisReport:
    length_histogram: dict[int, float]
    first_words_tree: dict
    concept_overlap_pct: Optional[float]

    def to_dict(self) -> dict:
        return {
            "schema_version": "1",
            "length_histogram": {
                str(k): round(v, 2) for k, v in sorted(self.length_histogram.items())
            },
            "first_words_tree": self.first_words_tree,
            "concept_overlap_pct": None
            if self.concept_overlap_pct is None
            else round(self.concept_overlap_pct, 2),
        }


def _texts(questions: Iterable[Union[str, QuestionRecord]]) -> list[str]:
    return [q.text if isinstance(q, QuestionRecord) else q for q in questions]


def length_distribution(
    questions: Iterable[Union[str, QuestionRecord]]
) -> dict[int, float]:
    """Percentage of questions at each word count."""
    texts = _texts(questions)
    counts: dict[int, int] = {}
    for t in texts:
        n = len(tokenize_words(t))
        counts[n] = counts.get(n, 0) + 1
    total = len(texts)
    return {k: 100.0 * v / total for k, v in sorted(counts.items())} if total else {}


def first_words_distribution(
    questions: Iterable[Union[str, QuestionRecord]], depth: int = 4
) -> dict:
    """Prefix tree of the first ``depth`` tokens, with counts at every node."""
    tree: dict = {}
    for text in _texts(questions):
        tokens = [t.lower() for t in tokenize_words(text)][:depth]
        node = tree
        for tok in tokens:
            child = node.setdefault(tok, {"count": 0, "children": {}})
            child["count"] += 1
            node = child["children"]
    return tree


def concept_overlap(
    links: Sequence[SubQuestionLink],
    questions: Mapping[int, QuestionRecord],
) -> float:
    """Percentage of pairs whose noun-chunk tokens overlap after plural folding."""
    n = 0
    n_overlap = 0
    main_cache: dict[int, set[str]] = {}
    for link in links:
        q = questions.get(link.main_question_id)
        if q is None:
            continue
        if link.main_question_id not in main_cache:
            main_cache[link.main_question_id] = chunk_token_set(q.text)
        main_set = main_cache[link.main_question_id]
        sub_set = chunk_token_set(link.sub_text)
        n += 1
        if main_set & sub_set:
            n_overlap += 1
    if n == 0:
        raise EmptyReportError("no resolvable links for concept overlap")
    return 100.0 * n_overlap / n


def analyze(
    questions: Mapping[int, QuestionRecord],
    links: Sequence[SubQuestionLink],
    depth: int = 4,
) -> AnalysisReport:
    texts = list(questions.values())
    try:
        overlap = concept_overlap(links, questions) if links else None
    except EmptyReportError:
        overlap = None
    return AnalysisReport(
        length_histogram=length_distribution(texts),
        first_words_tree=first_words_distribution(texts, depth=depth),
        concept_overlap_pct=overlap,
    )
