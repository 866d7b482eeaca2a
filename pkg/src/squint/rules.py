"""Pattern-rule engine that flags Perception questions.

A rule matches a question when all of its predicates hold: a case-insensitive
prefix, a case-insensitive substring, a blocklist of substrings, and an exact
word count. Questions matched by any rule are flagged as Perception; the
residue is the Reasoning-candidate set.

Notes on semantics (both are deliberate choices, overridable via the ruleset
data file): "contains" is plain substring matching, because entries like
"ed?" and "ing?" are suffix fragments of the final token; word count is an
exact count, not a maximum.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Optional, Sequence

from .core import QClass, QuestionRecord


class InvalidRuleError(ValueError):
    """A rule is missing both its prefix and substring predicates."""


_ALLOWED_KEYS = {"rule_id", "starts_with", "contains", "not_contains", "word_count"}


def tokenize_words(text: str) -> list[str]:
    """Whitespace tokens with a single trailing '?' stripped from the last."""
    tokens = text.split()
    if tokens and tokens[-1].endswith("?"):
        last = tokens[-1][:-1]
        if last:
            tokens[-1] = last
        else:
            tokens.pop()
    return tokens


@dataclass(frozen=True)
class RuleSpec:
    rule_id: str
    starts_with: Optional[str] = None
    contains: Optional[str] = None
    not_contains: tuple[str, ...] = ()
    word_count: Optional[int] = None

    def __post_init__(self) -> None:
        if self.starts_with is None and self.contains is None:
            raise InvalidRuleError(
                f"rule {self.rule_id!r}: needs starts_with or contains"
            )
        if any(not s for s in self.not_contains):
            raise InvalidRuleError(f"rule {self.rule_id!r}: empty not_contains entry")
        if self.word_count is not None and self.word_count <= 0:
            raise InvalidRuleError(f"rule {self.rule_id!r}: word_count must be > 0")


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[RuleSpec, ...]
    version: str = "unversioned"

    def __post_init__(self) -> None:
        ids = [r.rule_id for r in self.rules]
        if len(ids) != len(set(ids)):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise InvalidRuleError(f"duplicate rule ids: {dupes}")


@dataclass
class CoverageStats:
    """Per-rule match counts, attributing each question to its first match."""

    per_rule: dict[str, dict[str, float]]
    residue_pct: float
    n_total: int

    def to_dict(self) -> dict:
        return {
            "n_total": self.n_total,
            "per_rule": self.per_rule,
            "residue_pct": round(self.residue_pct, 2),
        }


def rule_matches(rule: RuleSpec, text: str) -> bool:
    """Apply one rule to a question text; all predicates are case-insensitive."""
    low = text.lower()
    if rule.starts_with is not None and not low.startswith(rule.starts_with.lower()):
        return False
    if rule.contains is not None and rule.contains.lower() not in low:
        return False
    if any(blocked.lower() in low for blocked in rule.not_contains):
        return False
    if rule.word_count is not None and len(tokenize_words(text)) != rule.word_count:
        return False
    return True


def classify_text(rules: RuleSet, text: str) -> tuple[QClass, Optional[str]]:
    """First-match classification of a raw question string."""
    for rule in rules.rules:
        if rule_matches(rule, text):
            return QClass.PERCEPTION_FLAGGED, rule.rule_id
    return QClass.REASONING_CANDIDATE, None


def classify_question(
    rules: RuleSet, q: QuestionRecord
) -> tuple[QClass, Optional[str]]:
    return classify_text(rules, q.text)


def split_dataset(
    rules: RuleSet, questions: Sequence[QuestionRecord]
) -> tuple[dict[int, tuple[QClass, Optional[str]]], CoverageStats]:
    """Label every question and tally per-rule coverage.

    Returns a map question_id -> (label, matched_rule_id) and coverage stats
    whose percentages sum with the residue to 100.
    """
    labels: dict[int, tuple[QClass, Optional[str]]] = {}
    counts = {r.rule_id: 0 for r in rules.rules}
    n_residue = 0
    for q in questions:
        label, rule_id = classify_question(rules, q)
        labels[q.question_id] = (label, rule_id)
        if rule_id is None:
            n_residue += 1
        else:
            counts[rule_id] += 1
    n = len(questions)
    per_rule = {
        rid: {"n_matched": c, "pct_of_corpus": 100.0 * c / n if n else 0.0}
        for rid, c in counts.items()
    }
    residue_pct = 100.0 * n_residue / n if n else 100.0
    return labels, CoverageStats(per_rule=per_rule, residue_pct=residue_pct, n_total=n)


def _rule_from_obj(obj: dict, index: int) -> RuleSpec:
    unknown = set(obj) - _ALLOWED_KEYS
    if unknown:
        raise InvalidRuleError(f"rule #{index}: unknown keys {sorted(unknown)}")
    if "rule_id" not in obj:
        raise InvalidRuleError(f"rule #{index}: missing rule_id")
    return RuleSpec(
        rule_id=obj["rule_id"],
        starts_with=obj.get("starts_with"),
        contains=obj.get("contains"),
        not_contains=tuple(obj.get("not_contains") or ()),
        word_count=obj.get("word_count"),
    )


def ruleset_from_json(data: str, version: Optional[str] = None) -> RuleSet:
    """Parse a ruleset from its JSON text (an array of rule objects)."""
    objs = json.loads(data)
    if not isinstance(objs, list):
        raise InvalidRuleError("ruleset file must be a JSON array")
    rules = tuple(_rule_from_obj(o, i) for i, o in enumerate(objs))
    if version is None:
        version = "sha256:" + hashlib.sha256(data.encode()).hexdigest()[:12]
    return RuleSet(rules=rules, version=version)


def load_ruleset(path: str, version: Optional[str] = None) -> RuleSet:
    with open(path, encoding="utf-8") as fh:
        return ruleset_from_json(fh.read(), version=version)


def default_ruleset() -> RuleSet:
    """The bundled 40-rule Perception filter."""
    data = resources.files("squint.data").joinpath("perception_rules.json").read_text()
    return ruleset_from_json(data, version="top40-v1")
