"""Command-line entry point exposing the pipeline as subcommands.

Exit codes: 0 success, 1 domain error (empty report, divergence), 2 usage or
I/O error. All randomness flows from --seed; outputs embed a run manifest and
are byte-identical across reruns with identical inputs and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from . import ingest
from .core import (
    AnswerSet,
    AttentionMap,
    DomainError,
    MatchMode,
    PredictionRecord,
    QuestionRecord,
)
from .evaluator import analyze, evaluate_pairs
from .ingest import CanonicalDatasetStore, FilterThresholds, IngestError
from .lab.experiment import ExperimentConfig, run_experiment
from .lab.train import log_to_csv, save_params
from .manifest import RunManifest, text_digest
from .rules import default_ruleset, load_ruleset, split_dataset
from .svg import grouped_bar_chart, histogram_chart, quadrant_chart


class UsageError(Exception):
    pass


def _load_questions(path: str, limit: Optional[int] = None) -> dict[int, QuestionRecord]:
    """Accept a canonical JSONL store or a VQA-style questions-only JSON file."""
    with open(path, encoding="utf-8") as fh:
        head = fh.read(2048)
    if head.lstrip().startswith("{") and '"questions"' in head:
        doc = ingest._load_json(path)
        records = {}
        for q in doc["questions"][: limit if limit else None]:
            records[q["question_id"]] = QuestionRecord(
                question_id=q["question_id"],
                image_id=q.get("image_id", 0),
                text=q["question"],
                answers=AnswerSet(majority_answer=""),
            )
        return records
    store = ingest.load_store(path)
    items = sorted(store.questions.items())
    if limit:
        items = items[:limit]
    return dict(items)


def _load_predictions(path: str) -> dict[int, PredictionRecord]:
    preds: dict[int, PredictionRecord] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"{path}:{lineno}: malformed JSON: {exc.msg}") from exc
            att = None
            raw_att = obj.get("attention")
            if raw_att is not None:
                grid = raw_att.get("grid") or []
                boxes = raw_att.get("boxes") or []
                flat = [w for row in grid for w in row] + list(boxes)
                att = AttentionMap(
                    weights=tuple(flat),
                    grid_h=len(grid),
                    grid_w=len(grid[0]) if grid else 0,
                    n_boxes=len(boxes),
                )
            preds[obj["question_id"]] = PredictionRecord(
                question_id=obj["question_id"],
                predicted_answer=obj["answer"],
                attention=att,
            )
    return preds


def _normalized_argv(argv: list[str]) -> list[str]:
    """Replace output-path flag values with placeholders in the manifest."""
    out = list(argv)
    for i, a in enumerate(out):
        if a in ("--out", "--svg", "--stats") and i + 1 < len(out):
            out[i + 1] = f"<{a.lstrip('-')}>"
    return out


def _write_json(obj: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _info(args, msg: str) -> None:
    if not args.quiet:
        print(msg, file=sys.stderr)


# --- subcommands ---


def cmd_classify(args, argv) -> int:
    rules = load_ruleset(args.rules) if args.rules else default_ruleset()
    questions = _load_questions(args.questions, args.limit)
    labels, stats = split_dataset(rules, list(questions.values()))
    manifest = RunManifest.build(
        _normalized_argv(argv),
        {"questions": args.questions, **({"rules": args.rules} if args.rules else {})},
        seed=args.seed,
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        for qid in sorted(labels):
            label, rule_id = labels[qid]
            fh.write(
                json.dumps(
                    {"question_id": qid, "label": label.value, "matched_rule": rule_id},
                    sort_keys=True,
                )
                + "\n"
            )
    if args.stats:
        _write_json(
            {
                "schema_version": "1",
                "ruleset_version": rules.version,
                **stats.to_dict(),
                "manifest": manifest.to_dict(),
            },
            args.stats,
        )
    _info(args, f"classified {stats.n_total} questions; residue {stats.residue_pct:.2f}%")
    return 0


def cmd_filter(args, argv) -> int:
    t = FilterThresholds(
        binary_min_agree=args.binary_min,
        other_min_agree=args.other_min,
        n_annotators=args.annotators,
    )
    store = ingest.load_store(args.infile)
    records = [store.questions[qid] for qid in sorted(store.questions)]
    if args.limit:
        records = records[: args.limit]
    kept = ingest.agreement_filter(records, t)
    kept_ids = {q.question_id for q in kept}
    out = CanonicalDatasetStore(
        questions={q.question_id: q for q in kept},
        links=[l for l in store.links if l.main_question_id in kept_ids],
        provenance={
            **store.provenance,
            "filter_thresholds": {
                "binary_min_agree": t.binary_min_agree,
                "other_min_agree": t.other_min_agree,
                "n_annotators": t.n_annotators,
            },
        },
    )
    ingest.save_store(out, args.out)
    _info(args, f"kept {len(kept)}/{len(records)} questions")
    return 0


def cmd_evaluate(args, argv) -> int:
    store = ingest.load_store(args.links)
    main_preds = _load_predictions(args.main_preds)
    sub_preds = _load_predictions(args.sub_preds)
    report = evaluate_pairs(
        main_preds,
        sub_preds,
        store.links,
        store.questions,
        mode=MatchMode(args.mode),
        seed=args.seed,
        n_resamples=args.resamples,
    )
    manifest = RunManifest.build(
        _normalized_argv(argv),
        {"main_preds": args.main_preds, "sub_preds": args.sub_preds, "links": args.links},
        seed=args.seed,
    )
    doc = report.to_dict()
    doc["manifest"] = manifest.to_dict()
    _write_json(doc, args.out)
    if report.n_missing_predictions:
        _info(
            args,
            f"warning: {report.n_missing_predictions} links lacked predictions and were excluded",
        )
    if args.svg:
        os.makedirs(args.svg, exist_ok=True)
        digest = manifest.digest()
        with open(os.path.join(args.svg, "quadrants.svg"), "w") as fh:
            fh.write(quadrant_chart(doc, digest))
        reports = [("this run", doc)]
        for path in args.compare or []:
            with open(path, encoding="utf-8") as fh:
                reports.append((os.path.basename(path), json.load(fh)))
        if len(reports) > 1:
            metrics = ["consistency_pct", "reasoning_accuracy_pct", "all_sub_wrong_pct"]
            series = [
                (name, [float(r.get(m) or 0.0) for m in metrics]) for name, r in reports
            ]
            with open(os.path.join(args.svg, "comparison.svg"), "w") as fh:
                fh.write(
                    grouped_bar_chart(metrics, series, "Report comparison", "%", digest)
                )
    _info(args, f"consistency {report.consistency_pct:.2f}% over {report.n_pairs} pairs")
    return 0


def cmd_analyze(args, argv) -> int:
    questions = _load_questions(args.questions, args.limit)
    links = []
    if args.links:
        store = ingest.load_store(args.links)
        links = store.links
        if not store.questions:
            store.questions = questions
    report = analyze(questions, links)
    manifest = RunManifest.build(
        _normalized_argv(argv),
        {"questions": args.questions, **({"links": args.links} if args.links else {})},
        seed=args.seed,
    )
    doc = report.to_dict()
    doc["manifest"] = manifest.to_dict()
    _write_json(doc, args.out)
    if args.svg:
        os.makedirs(args.svg, exist_ok=True)
        with open(os.path.join(args.svg, "length_histogram.svg"), "w") as fh:
            fh.write(
                histogram_chart(
                    doc["length_histogram"], "Question word lengths", manifest.digest()
                )
            )
    return 0


def cmd_experiment(args, argv) -> int:
    with open(args.config, encoding="utf-8") as fh:
        config_text = fh.read()
    config = ExperimentConfig.from_dict(json.loads(config_text))
    result = run_experiment(config)
    os.makedirs(args.out, exist_ok=True)
    manifest = RunManifest.build(
        _normalized_argv(argv),
        {"config": args.config},
        config_digest=text_digest(config_text),
        seed=config.train.seed,
    )
    for name, report in result.reports.items():
        doc = report.to_dict()
        doc["manifest"] = manifest.to_dict()
        doc["variant"] = name
        _write_json(doc, os.path.join(args.out, f"report_{name}.json"))
    for name, log in result.logs.items():
        with open(os.path.join(args.out, f"train_{name}.csv"), "w") as fh:
            fh.write(log_to_csv(log))
    for name, params in result.params.items():
        save_params(params, os.path.join(args.out, f"checkpoint_{name}.ckpt"))
    _write_json(
        {"schema_version": "1", "config": config.to_dict(), "manifest": manifest.to_dict()},
        os.path.join(args.out, "config_echo.json"),
    )
    for name in ("base", "finetune", "squint"):
        r = result.reports[name]
        _info(
            args,
            f"{name}: consistency {r.consistency_pct:.2f}%  "
            f"attn_corr {r.attn_corr_mean if r.attn_corr_mean is None else round(r.attn_corr_mean, 4)}",
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="squint-vqa",
        description="Question classification, sub-question linking, consistency "
        "metrics, and attention-alignment experiments.",
    )
    p.add_argument("--seed", type=int, default=0, help="seed for all randomness (default: 0)")
    p.add_argument("--limit", type=int, default=None, help="cap input records, for fixture-scale runs")
    p.add_argument("--quiet", action="store_true", help="suppress progress messages")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="label questions with the Perception-filter rules")
    c.add_argument("--rules", help="ruleset JSON (default: bundled 40-rule set)")
    c.add_argument("--questions", required=True, help="questions file (store JSONL or VQA JSON)")
    c.add_argument("--out", required=True, help="labels JSONL output")
    c.add_argument("--stats", help="coverage stats JSON output")
    c.set_defaults(func=cmd_classify)

    f = sub.add_parser("filter", help="drop questions with low annotator agreement")
    f.add_argument("--in", dest="infile", required=True, help="canonical store JSONL input")
    f.add_argument("--binary-min", type=int, default=8, help="min agreement for yes/no questions (default: 8)")
    f.add_argument("--other-min", type=int, default=5, help="min agreement for other questions (default: 5)")
    f.add_argument("--annotators", type=int, default=10, help="annotators per question (default: 10)")
    f.add_argument("--out", required=True, help="filtered store JSONL output")
    f.set_defaults(func=cmd_filter)

    e = sub.add_parser("evaluate", help="quadrant consistency report from predictions")
    e.add_argument("--main-preds", required=True, help="main-question predictions JSONL")
    e.add_argument("--sub-preds", required=True, help="sub-question predictions JSONL")
    e.add_argument("--links", required=True, help="canonical store JSONL with questions and links")
    e.add_argument("--mode", choices=[m.value for m in MatchMode], default="exact",
                   help="answer matching mode (default: exact)")
    e.add_argument("--resamples", type=int, default=100,
                   help="resamples for balanced consistency (default: 100)")
    e.add_argument("--out", required=True, help="report JSON output")
    e.add_argument("--svg", help="directory for SVG charts")
    e.add_argument("--compare", action="append", help="existing report JSON to chart alongside")
    e.set_defaults(func=cmd_evaluate)

    a = sub.add_parser("analyze", help="corpus analytics: lengths, first words, concept overlap")
    a.add_argument("--questions", required=True)
    a.add_argument("--links", help="canonical store JSONL with links")
    a.add_argument("--out", required=True)
    a.add_argument("--svg", help="directory for SVG charts")
    a.set_defaults(func=cmd_analyze)

    x = sub.add_parser("experiment", help="base vs finetune vs attention-aligned comparison")
    x.add_argument("--config", required=True, help="experiment config JSON")
    x.add_argument("--out", required=True, help="output directory")
    x.set_defaults(func=cmd_experiment)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except (FileNotFoundError, IsADirectoryError, PermissionError, IngestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
