"""Four-quadrant consistency evaluation of (main, sub) prediction pairs.

Each linked pair lands in a quadrant by joint correctness: Q1 both right,
Q2 main right / sub wrong, Q3 sub right only, Q4 both wrong. Consistency is
Q1/(Q1+Q2) — of the mains the model answers correctly, how often it also
knows the perceptual fact the answer rests on. Balanced consistency
subsamples the majority yes/no ground-truth class so a yes-biased model
cannot look consistent for free, and attention maps (when supplied) are
compared per pair with Pearson correlation.

Run: python3 demos/03_consistency_evaluation.py
"""

from squint.core import (
    AnswerSet,
    AttentionMap,
    PredictionRecord,
    QuestionRecord,
    SubQuestionLink,
)
from squint.evaluator import evaluate_pairs


def main() -> None:
    questions = {
        1: QuestionRecord(1, 0, "Is the banana ripe enough to eat?", AnswerSet.from_raw(["yes"] * 10)),
        2: QuestionRecord(2, 0, "Is the soup too salty?", AnswerSet.from_raw(["no"] * 10)),
        3: QuestionRecord(3, 0, "Can this vehicle drive on sand?", AnswerSet.from_raw(["yes"] * 10)),
    }
    links = [
        SubQuestionLink(1, 10, "What color is the banana?", "yellow"),
        SubQuestionLink(1, 11, "Is the banana soft?", "yes"),
        SubQuestionLink(2, 12, "Is there salt on the table?", "no"),
        SubQuestionLink(3, 13, "Does the vehicle have big wheels?", "yes"),
    ]
    focused = AttentionMap(weights=(0.7, 0.2, 0.1), n_boxes=3)
    similar = AttentionMap(weights=(0.6, 0.3, 0.1), n_boxes=3)
    elsewhere = AttentionMap(weights=(0.1, 0.2, 0.7), n_boxes=3)

    main_preds = {
        1: PredictionRecord(1, "yes", focused),     # right
        2: PredictionRecord(2, "yes", focused),     # wrong
        3: PredictionRecord(3, "yes", focused),     # right
    }
    sub_preds = {
        10: PredictionRecord(10, "yellow", similar),   # right, attends alike
        11: PredictionRecord(11, "no", elsewhere),     # wrong
        12: PredictionRecord(12, "no", elsewhere),     # right (but main wrong)
        13: PredictionRecord(13, "no", elsewhere),     # wrong
    }

    report = evaluate_pairs(main_preds, sub_preds, links, questions, seed=0)
    doc = report.to_dict()
    print("Quadrant counts:", doc["counts"])
    print("Quadrant percentages:", doc["pct"])
    print(f"Consistency:            {doc['consistency_pct']}%")
    print(f"Balanced consistency:   {doc['balanced_consistency_pct']}%"
          f" (std {doc['balanced_consistency_std']})")
    print(f"Reasoning accuracy:     {doc['reasoning_accuracy_pct']}% (per distinct main)")
    print(f"All-subs-wrong rate:    {doc['all_sub_wrong_pct']}% of correct mains")
    print(f"Attention correlation:  {doc['attn_corr_mean']} (per-pair Pearson, mean)")


if __name__ == "__main__":
    main()
