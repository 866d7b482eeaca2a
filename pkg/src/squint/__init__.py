"""Consistency evaluation for VQA models.

Classify questions into Perception vs. Reasoning with pattern rules, link
Reasoning questions to Perception sub-questions, compute four-quadrant
consistency metrics, and demonstrate attention-alignment finetuning on a
desk-scale differentiable model.
"""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    AnswerSet,
    AttentionMap,
    MatchMode,
    PredictionRecord,
    QClass,
    QuestionRecord,
    Split,
    SubQuestionLink,
    is_binary,
    match_answers,
    normalize_answer,
)
from .rules import RuleSet, RuleSpec, default_ruleset, rule_matches, tokenize_words  # noqa: F401
from .evaluator import QuadrantReport, evaluate_pairs, quadrant_of  # noqa: F401
