"""Shared domain types, answer normalization, and answer matching.

Everything here is an immutable value or a pure function; the rest of the
package builds on these primitives.
"""

from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np


class DomainError(Exception):
    """Base class for domain-level failures (as opposed to usage errors)."""


class MissingAnnotatorDataError(DomainError):
    """Soft matching was requested but no per-annotator answers exist."""


class AttentionLayoutError(DomainError):
    """Two attention maps with incompatible layouts were compared."""


class QClass(str, Enum):
    PERCEPTION_FLAGGED = "PerceptionFlagged"
    REASONING_CANDIDATE = "ReasoningCandidate"
    REASONING = "Reasoning"
    INVALID = "Invalid"
    UNLABELED = "Unlabeled"


class Split(str, Enum):
    TRAIN = "train"
    VAL = "val"


class MatchMode(str, Enum):
    EXACT = "exact"
    VQA_SOFT = "vqa_soft"


_ARTICLES = {"a", "an", "the"}

_DIGIT_WORDS = {
    "zero": "0",
    "one": "1",
    "two": "2",
    "three": "3",
    "four": "4",
    "five": "5",
    "six": "6",
    "seven": "7",
    "eight": "8",
    "nine": "9",
    "ten": "10",
}


def normalize_answer(text: str) -> str:
    """Canonicalize a free-form answer string.

    Lowercases, collapses whitespace, strips leading/trailing punctuation,
    drops leading articles (a/an/the), and maps the digit words zero..ten to
    digits. Idempotent; empty input normalizes to the empty string.
    """
    s = text.lower().strip()
    s = s.strip(string.punctuation + string.whitespace)
    tokens = s.split()
    while len(tokens) > 1 and tokens[0] in _ARTICLES:
        tokens = tokens[1:]
    tokens = [_DIGIT_WORDS.get(t, t) for t in tokens]
    return " ".join(tokens)


def normalize_text(text: str) -> str:
    """Lowercase and collapse whitespace; used for question-text keys."""
    return " ".join(text.lower().split())


@dataclass(frozen=True)
class AnswerSet:
    """Ground-truth answers for one question.

    ``majority_answer`` is the modal normalized raw answer (ties broken
    lexicographically); ``raw_answers`` are the per-annotator strings as
    given, up to 10 of them.
    """

    majority_answer: str
    raw_answers: tuple[str, ...] = ()

    @property
    def is_binary(self) -> bool:
        return self.majority_answer in ("yes", "no")

    @classmethod
    def from_raw(cls, raw_answers: Sequence[str]) -> "AnswerSet":
        """Build from per-annotator answers, computing the majority."""
        if not raw_answers:
            raise ValueError("raw_answers must be non-empty")
        counts = Counter(normalize_answer(a) for a in raw_answers)
        top = max(counts.values())
        # ties broken lexicographically for determinism
        majority = min(a for a, c in counts.items() if c == top)
        return cls(majority_answer=majority, raw_answers=tuple(raw_answers))

    @classmethod
    def from_single(cls, answer: str) -> "AnswerSet":
        return cls(majority_answer=normalize_answer(answer))

    def modal_count(self) -> int:
        """How many raw answers agree with the majority answer."""
        if not self.raw_answers:
            return 1
        return sum(
            1 for a in self.raw_answers if normalize_answer(a) == self.majority_answer
        )


@dataclass(frozen=True)
class QuestionRecord:
    question_id: int
    image_id: int
    text: str
    answers: AnswerSet
    split: Split = Split.TRAIN
    q_class: QClass = QClass.UNLABELED

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError(f"question {self.question_id}: empty text")


@dataclass(frozen=True)
class SubQuestionLink:
    """One (Reasoning main question -> Perception sub-question) edge."""

    main_question_id: int
    sub_question_id: int
    sub_text: str
    sub_answer: str
    worker_id: str = ""
    #: JSON-encoded unknown fields from the source file, preserved verbatim.
    passthrough: Optional[str] = None

    def dedupe_key(self) -> tuple[int, str, str]:
        return (
            self.main_question_id,
            normalize_text(self.sub_text),
            normalize_answer(self.sub_answer),
        )


@dataclass(frozen=True)
class AttentionMap:
    """Flattened attention weights: spatial grid first, then per-box weights."""

    weights: tuple[float, ...]
    grid_h: int = 0
    grid_w: int = 0
    n_boxes: int = 0

    def __post_init__(self) -> None:
        expected = self.grid_h * self.grid_w + self.n_boxes
        if len(self.weights) != expected:
            raise ValueError(
                f"attention has {len(self.weights)} weights, layout implies {expected}"
            )
        if any(w < 0 for w in self.weights):
            raise ValueError("attention weights must be non-negative")

    @property
    def layout(self) -> tuple[int, int, int]:
        return (self.grid_h, self.grid_w, self.n_boxes)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=np.float64)


@dataclass(frozen=True)
class PredictionRecord:
    question_id: int
    predicted_answer: str
    attention: Optional[AttentionMap] = None

    def __post_init__(self) -> None:
        if not self.predicted_answer:
            raise ValueError(f"prediction {self.question_id}: empty answer")


#: Soft score at or above this counts as a correct answer.
CORRECT_THRESHOLD = 0.5


def match_answers(pred: str, gt: AnswerSet, mode: MatchMode = MatchMode.EXACT) -> float:
    """Score a predicted answer against the ground truth, in [0, 1].

    ``exact`` compares normalized strings; ``vqa_soft`` is the usual
    min(matching annotators / 3, 1) credit and requires raw answers.
    """
    if not pred:
        raise ValueError("pred must be non-empty")
    mode = MatchMode(mode)
    p = normalize_answer(pred)
    if mode is MatchMode.EXACT:
        return 1.0 if p == gt.majority_answer else 0.0
    if not gt.raw_answers:
        raise MissingAnnotatorDataError(
            "vqa_soft matching requires per-annotator raw answers"
        )
    n_match = sum(1 for a in gt.raw_answers if normalize_answer(a) == p)
    return min(n_match / 3.0, 1.0)


def is_correct(pred: str, gt: AnswerSet, mode: MatchMode = MatchMode.EXACT) -> bool:
    return match_answers(pred, gt, mode) >= CORRECT_THRESHOLD


def is_binary(q: QuestionRecord) -> bool:
    """True iff the majority answer is yes or no."""
    return q.answers.is_binary
