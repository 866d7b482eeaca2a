"""Corpus analytics: length histogram, first-words tree, concept overlap.

The noun-chunk extractor is a small closed-class heuristic (no parser
dependency): tokens that are not known determiners, question words, verbs,
adjectives, or function words default to nouns, and ``det? adj* noun+``
spans become chunks. Overlap between a main question's chunks and its
sub-question's chunks — after folding plurals — estimates how often the
pair talks about the same visual concept.

Run: python3 demos/04_corpus_analytics.py
"""

import json

from squint.chunker import extract_noun_chunks
from squint.core import AnswerSet, QuestionRecord, SubQuestionLink
from squint.evaluator import analyze


def q(qid, text):
    return QuestionRecord(qid, 0, text, AnswerSet(majority_answer=""))


def main() -> None:
    for text in (
        "Is the banana ripe enough to eat?",
        "What color is the banana?",
        "Is the airplane taking off or landing?",
        "Are the wheels out?",
    ):
        print(f"  {text:42s} chunks: {extract_noun_chunks(text)}")

    questions = {
        1: q(1, "Is the banana ripe enough to eat?"),
        2: q(2, "Is the soup too salty?"),
        3: q(3, "Are the wheels out?"),
        4: q(4, "How many dogs are there?"),
    }
    links = [
        SubQuestionLink(1, 10, "What color is the banana?", "yellow"),
        SubQuestionLink(2, 11, "Is the man wearing a hat?", "yes"),
        SubQuestionLink(3, 12, "Is the wheel round?", "yes"),
    ]
    report = analyze(questions, links).to_dict()
    print("\nLength histogram (% of questions by word count):")
    print(" ", report["length_histogram"])
    print(f"Concept overlap: {report['concept_overlap_pct']}% of pairs share a chunk token")
    print("First-words tree (top level):")
    for tok, node in report["first_words_tree"].items():
        print(f"  {tok!r}: {node['count']}  children {sorted(node['children'])}")
    print("\nFull tree as JSON:")
    print(json.dumps(report["first_words_tree"], indent=2)[:400], "...")


if __name__ == "__main__":
    main()
