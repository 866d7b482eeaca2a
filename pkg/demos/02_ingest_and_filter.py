"""Building a canonical dataset store and filtering by annotator agreement.

Each question carries ten annotator answers. Binary (yes/no) questions are
kept only when at least 8 of 10 annotators agree; other questions need 5 of
10. Sub-question links are deduplicated on normalized (text, answer) within
each main question, then everything round-trips through a deterministic
JSONL store.

Run: python3 demos/02_ingest_and_filter.py
"""

import tempfile

from squint.core import AnswerSet, QuestionRecord, SubQuestionLink
from squint.ingest import (
    CanonicalDatasetStore,
    agreement_filter,
    dataset_stats,
    dedupe_links,
    load_store,
    save_store,
)


def q(qid, text, raw):
    return QuestionRecord(
        question_id=qid, image_id=0, text=text, answers=AnswerSet.from_raw(raw)
    )


def main() -> None:
    questions = [
        q(1, "Is the banana ripe enough to eat?", ["yes"] * 9 + ["no"]),
        q(2, "Is the soup too salty?", ["yes"] * 6 + ["no"] * 4),  # ambiguous
        q(3, "Where was this photo taken?", ["beach"] * 5 + ["shore", "coast", "sand", "sea", "ocean"]),
    ]
    print("Agreement filter (binary needs 8/10, other needs 5/10):")
    kept = agreement_filter(questions)
    for rec in questions:
        verdict = "kept" if rec in kept else "dropped"
        modal = rec.answers.modal_count()
        kind = "binary" if rec.answers.is_binary else "other"
        print(f"  [{verdict:7s}] {kind:6s} modal {modal}/10  {rec.text}")

    links = [
        SubQuestionLink(1, 0, "What color is the banana?", "yellow", worker_id="w1"),
        SubQuestionLink(1, 1, "What color is the  banana?", "Yellow", worker_id="w2"),
        SubQuestionLink(1, 2, "Is the banana soft?", "yes", worker_id="w3"),
    ]
    unique = dedupe_links(links)
    print(f"\nLink dedup: {len(links)} raw -> {len(unique)} unique")
    for l in unique:
        print(f"  main {l.main_question_id}: {l.sub_text!r} -> {l.sub_answer!r}")

    store = CanonicalDatasetStore(
        questions={rec.question_id: rec for rec in kept},
        links=[l for l in unique if l.main_question_id in {rec.question_id for rec in kept}],
        provenance={"source": "demo"},
    )
    with tempfile.NamedTemporaryFile(suffix=".jsonl") as tmp:
        save_store(store, tmp.name)
        reloaded = load_store(tmp.name)
        save_store(reloaded, tmp.name)
        print("\nJSONL round trip is bit-identical:", reloaded.questions == store.questions)

    stats = dataset_stats(store)
    print(f"Store: {stats['n_main']} mains, {stats['n_sub']} subs, "
          f"{stats['subs_per_main_mean']:.2f} subs per main")


if __name__ == "__main__":
    main()
