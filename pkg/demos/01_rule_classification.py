"""Classifying questions as Perception-flagged or Reasoning candidates.

A question like "How many dogs are there?" can be answered by looking alone;
"Is the banana ripe enough to eat?" needs perception composed with prior
knowledge. The bundled 40-rule pattern set flags the former kind so the
residue can be treated as likely-Reasoning questions.

Run: python3 demos/01_rule_classification.py
"""

from squint.core import AnswerSet, QuestionRecord
from squint.rules import classify_text, default_ruleset, split_dataset

QUESTIONS = [
    "How many dogs are there?",
    "What color is the banana?",
    "Is there a cup on the table?",
    "Is the man wearing a hat?",
    "Is the banana ripe enough to eat?",
    "Is the soup too salty?",
    "Is it safe to cross the street?",
    "Why is the man smiling?",
]


def main() -> None:
    rules = default_ruleset()
    print(f"ruleset: {rules.version} with {len(rules.rules)} rules\n")

    print("Per-question classification (first matching rule wins):")
    for text in QUESTIONS:
        label, rule_id = classify_text(rules, text)
        tag = f"via rule {rule_id!r}" if rule_id else "no rule matched"
        print(f"  {label.value:18s} {tag:24s} {text}")

    records = [
        QuestionRecord(question_id=i, image_id=0, text=t, answers=AnswerSet(majority_answer=""))
        for i, t in enumerate(QUESTIONS)
    ]
    _, stats = split_dataset(rules, records)
    print(f"\nResidue (Reasoning candidates): {stats.residue_pct:.1f}% of {stats.n_total}")
    print("Rules that fired on this tiny corpus:")
    for rule_id, row in stats.per_rule.items():
        if row["n_matched"]:
            print(f"  {rule_id:16s} matched {row['n_matched']} ({row['pct_of_corpus']:.1f}%)")


if __name__ == "__main__":
    main()
