"""Dataset ingestion: external-file adapters, agreement filtering, dedup.

Two external layouts are understood:

* the public VQA v2 pair of files ({"questions": [...]}, {"annotations": [...]})
* sub-question link files, either in the canonical JSONL store format or as a
  JSON object keyed by main question id with an ``introspect`` list per entry.

The canonical on-disk store is JSON Lines, one record per line, sorted by id,
so that load -> write -> load round-trips bit-identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .core import (
    AnswerSet,
    DomainError,
    QClass,
    QuestionRecord,
    Split,
    SubQuestionLink,
    normalize_answer,
)


class IngestError(DomainError):
    pass


class OrphanIdError(IngestError):
    """Question and annotation files disagree on the id set."""

    def __init__(self, missing_annotations: Sequence[int], missing_questions: Sequence[int]):
        self.missing_annotations = sorted(missing_annotations)
        self.missing_questions = sorted(missing_questions)
        super().__init__(
            f"id mismatch: {len(self.missing_annotations)} questions without "
            f"annotations {self.missing_annotations[:10]}, "
            f"{len(self.missing_questions)} annotations without questions "
            f"{self.missing_questions[:10]}"
        )


class DanglingLinkError(IngestError):
    """Links referencing main question ids absent from the store."""

    def __init__(self, unknown_ids: Sequence[int]):
        self.unknown_ids = sorted(set(unknown_ids))
        super().__init__(
            f"{len(self.unknown_ids)} links reference unknown main question ids "
            f"(first few: {self.unknown_ids[:10]})"
        )


class AnnotatorCountError(IngestError):
    def __init__(self, question_id: int, got: int, expected: int):
        self.question_id = question_id
        super().__init__(
            f"question {question_id}: has {got} raw answers, expected {expected}"
        )


# Published reference counts, used as ingest self-checks when the real files
# are available.
VQA_V2_VAL_QUESTIONS = 214_354
INTROSPECT_TRAIN_COUNTS = (55_799, 166_927)  # (main questions, sub questions)
INTROSPECT_VAL_COUNTS = (21_677, 71_714)


@dataclass(frozen=True)
class FilterThresholds:
    """Minimum modal-answer agreement needed to keep a question."""

    binary_min_agree: int = 8
    other_min_agree: int = 5
    n_annotators: int = 10

    def __post_init__(self) -> None:
        for name in ("binary_min_agree", "other_min_agree"):
            v = getattr(self, name)
            if not (0 < v <= self.n_annotators):
                raise ValueError(f"{name}={v} out of range 1..{self.n_annotators}")


@dataclass
class CanonicalDatasetStore:
    questions: dict[int, QuestionRecord] = field(default_factory=dict)
    links: list[SubQuestionLink] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def validate(self) -> None:
        unknown = [l.main_question_id for l in self.links if l.main_question_id not in self.questions]
        if unknown:
            raise DanglingLinkError(unknown)
        seen = set()
        for link in self.links:
            key = link.dedupe_key()
            if key in seen:
                raise IngestError(f"duplicate link triple {key}")
            seen.add(key)


def _load_json(path: str):
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise IngestError(f"{path}: malformed JSON at byte offset {exc.pos}: {exc.msg}") from exc


def load_vqa(
    questions_path: str,
    annotations_path: str,
    split: Split = Split.TRAIN,
    limit: Optional[int] = None,
) -> list[QuestionRecord]:
    """Adapt the public VQA v2 question/annotation file pair.

    Raw per-annotator answers are preserved; the majority answer is computed
    from them via answer normalization.
    """
    qdoc = _load_json(questions_path)
    adoc = _load_json(annotations_path)
    questions = qdoc.get("questions")
    annotations = adoc.get("annotations")
    if questions is None:
        raise IngestError(f"{questions_path}: missing 'questions' array")
    if annotations is None:
        raise IngestError(f"{annotations_path}: missing 'annotations' array")
    if limit is not None:
        questions = questions[:limit]
        qids_limited = {q["question_id"] for q in questions}
        annotations = [a for a in annotations if a["question_id"] in qids_limited]

    ann_by_id = {a["question_id"]: a for a in annotations}
    qids = {q["question_id"] for q in questions}
    missing_ann = qids - set(ann_by_id)
    missing_q = set(ann_by_id) - qids
    if missing_ann or missing_q:
        raise OrphanIdError(missing_ann, missing_q)

    records = []
    for q in questions:
        ann = ann_by_id[q["question_id"]]
        raw = [a["answer"] for a in ann.get("answers", [])]
        if raw:
            answers = AnswerSet.from_raw(raw)
        else:
            answers = AnswerSet.from_single(ann.get("multiple_choice_answer", ""))
        records.append(
            QuestionRecord(
                question_id=q["question_id"],
                image_id=q["image_id"],
                text=q["question"],
                answers=answers,
                split=split,
            )
        )
    return records


def load_introspect(path: str, limit: Optional[int] = None) -> list[SubQuestionLink]:
    """Load sub-question links from a link file.

    Accepts either canonical JSONL link records or a JSON object keyed by
    main question id with an ``introspect`` list of sub-question entries.
    Sub-question ids are assigned sequentially in file order; unknown fields
    are preserved verbatim in each link's passthrough blob.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.strip()
    if not stripped:
        return []
    if stripped.startswith("{") and '"kind"' not in stripped.splitlines()[0]:
        doc = json.loads(stripped)
        links = []
        next_id = 0
        for main_id_str, entry in doc.items():
            main_id = int(main_id_str)
            for sub in entry.get("introspect", []):
                known = {"sub_question", "sub_answer", "worker_id"}
                extra = {k: v for k, v in sub.items() if k not in known}
                links.append(
                    SubQuestionLink(
                        main_question_id=main_id,
                        sub_question_id=next_id,
                        sub_text=sub["sub_question"],
                        sub_answer=normalize_answer(str(sub["sub_answer"])),
                        worker_id=str(sub.get("worker_id", "")),
                        passthrough=json.dumps(extra, sort_keys=True) if extra else None,
                    )
                )
                next_id += 1
                if limit is not None and next_id >= limit:
                    return links
        return links
    # canonical JSONL: keep only link records
    store = load_store_text(stripped)
    links = [l for l in store.links]
    if limit is not None:
        links = links[:limit]
    return links


def agreement_filter(
    records: Iterable[QuestionRecord], t: FilterThresholds = FilterThresholds()
) -> list[QuestionRecord]:
    """Drop questions whose annotators disagree too much.

    Binary questions need ``binary_min_agree`` of ``n_annotators`` matching
    the majority answer; everything else needs ``other_min_agree``.
    """
    kept = []
    for rec in records:
        n_raw = len(rec.answers.raw_answers)
        if n_raw != t.n_annotators:
            raise AnnotatorCountError(rec.question_id, n_raw, t.n_annotators)
        modal = rec.answers.modal_count()
        need = t.binary_min_agree if rec.answers.is_binary else t.other_min_agree
        if modal >= need:
            kept.append(rec)
    return kept


def dedupe_links(links: Iterable[SubQuestionLink]) -> list[SubQuestionLink]:
    """Keep the first occurrence per (main id, sub text, sub answer) triple."""
    seen: set[tuple[int, str, str]] = set()
    out = []
    for link in links:
        key = link.dedupe_key()
        if key in seen:
            continue
        seen.add(key)
        out.append(link)
    return out


def dataset_stats(store: CanonicalDatasetStore, n_vqa_total: Optional[int] = None) -> dict:
    """Headline counts: mains with links, links, links-per-main mean."""
    by_main: dict[int, int] = {}
    for link in store.links:
        by_main[link.main_question_id] = by_main.get(link.main_question_id, 0) + 1
    n_main = len(by_main)
    n_sub = len(store.links)
    mean = n_sub / n_main if n_main else 0.0
    stats = {
        "n_main": n_main,
        "n_sub": n_sub,
        "subs_per_main_mean": mean,
        "pct_of_vqa": (100.0 * n_main / n_vqa_total) if n_vqa_total else None,
        "notes": [
            "published summaries quote 3.1 and 2.60 sub-questions per main "
            "question while the published split counts imply 2.99; "
            f"computed value here is {mean:.2f}"
        ],
    }
    return stats


# --- canonical JSONL store serialization ---


def _question_to_obj(q: QuestionRecord) -> dict:
    return {
        "kind": "question",
        "question_id": q.question_id,
        "image_id": q.image_id,
        "text": q.text,
        "majority_answer": q.answers.majority_answer,
        "raw_answers": list(q.answers.raw_answers),
        "split": q.split.value,
        "q_class": q.q_class.value,
    }


def _link_to_obj(l: SubQuestionLink) -> dict:
    obj = {
        "kind": "link",
        "main_question_id": l.main_question_id,
        "sub_question_id": l.sub_question_id,
        "sub_text": l.sub_text,
        "sub_answer": l.sub_answer,
        "worker_id": l.worker_id,
    }
    if l.passthrough is not None:
        obj["passthrough"] = l.passthrough
    return obj


def store_to_text(store: CanonicalDatasetStore) -> str:
    lines = []
    if store.provenance:
        lines.append(json.dumps({"kind": "provenance", **store.provenance}, sort_keys=True))
    for qid in sorted(store.questions):
        lines.append(json.dumps(_question_to_obj(store.questions[qid]), sort_keys=True))
    for link in sorted(store.links, key=lambda l: l.sub_question_id):
        lines.append(json.dumps(_link_to_obj(link), sort_keys=True))
    return "\n".join(lines) + "\n"


def save_store(store: CanonicalDatasetStore, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(store_to_text(store))


def load_store_text(text: str) -> CanonicalDatasetStore:
    store = CanonicalDatasetStore()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise IngestError(f"line {lineno}: malformed JSON at byte offset {exc.pos}") from exc
        kind = obj.get("kind")
        if kind == "provenance":
            store.provenance = {k: v for k, v in obj.items() if k != "kind"}
        elif kind == "question":
            store.questions[obj["question_id"]] = QuestionRecord(
                question_id=obj["question_id"],
                image_id=obj["image_id"],
                text=obj["text"],
                answers=AnswerSet(
                    majority_answer=obj["majority_answer"],
                    raw_answers=tuple(obj["raw_answers"]),
                ),
                split=Split(obj["split"]),
                q_class=QClass(obj["q_class"]),
            )
        elif kind == "link":
            store.links.append(
                SubQuestionLink(
                    main_question_id=obj["main_question_id"],
                    sub_question_id=obj["sub_question_id"],
                    sub_text=obj["sub_text"],
                    sub_answer=obj["sub_answer"],
                    worker_id=obj.get("worker_id", ""),
                    passthrough=obj.get("passthrough"),
                )
            )
        else:
            raise IngestError(f"line {lineno}: unknown record kind {kind!r}")
    return store


def load_store(path: str) -> CanonicalDatasetStore:
    with open(path, encoding="utf-8") as fh:
        return load_store_text(fh.read())
