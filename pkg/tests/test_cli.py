import json
import os

import pytest

from squint.cli import main
from squint.core import SubQuestionLink
from squint.ingest import CanonicalDatasetStore, save_store
from tests.conftest import make_question


@pytest.fixture(autouse=True)
def fixed_epoch(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")


def write_store(path, questions, links=(), provenance=None):
    store = CanonicalDatasetStore(
        questions={q.question_id: q for q in questions},
        links=list(links),
        provenance=dict(provenance or {}),
    )
    save_store(store, str(path))
    return str(path)


def write_preds(path, preds):
    with open(path, "w") as fh:
        for p in preds:
            fh.write(json.dumps(p) + "\n")
    return str(path)


@pytest.fixture
def eval_inputs(tmp_path):
    questions = [
        make_question(1, "Is the banana ripe enough to eat?", "", raw=["yes"] * 10),
        make_question(2, "Is the soup too salty?", "", raw=["no"] * 10),
    ]
    links = [
        SubQuestionLink(1, 10, "What color is the banana?", "yellow"),
        SubQuestionLink(2, 11, "Is the soup hot?", "yes"),
        SubQuestionLink(2, 12, "Does it have salt?", "yes"),
    ]
    store = write_store(tmp_path / "store.jsonl", questions, links)
    att = {"grid": [[0.25, 0.25], [0.25, 0.25]], "boxes": [0.6, 0.4]}
    att2 = {"grid": [[0.1, 0.2], [0.3, 0.4]], "boxes": [0.5, 0.5]}
    main = write_preds(
        tmp_path / "main.jsonl",
        [
            {"question_id": 1, "answer": "yes", "attention": att2},
            {"question_id": 2, "answer": "yes", "attention": att2},
        ],
    )
    sub = write_preds(
        tmp_path / "sub.jsonl",
        [
            {"question_id": 10, "answer": "yellow", "attention": att},
            {"question_id": 11, "answer": "no", "attention": att2},
            {"question_id": 12, "answer": "yes", "attention": att2},
        ],
    )
    return store, main, sub


class TestClassify:
    def test_labels_and_stats(self, tmp_path):
        store = write_store(
            tmp_path / "store.jsonl",
            [
                make_question(1, "How many dogs are there?", "2"),
                make_question(2, "Is the soup too salty?", "no"),
            ],
        )
        out = tmp_path / "labels.jsonl"
        stats = tmp_path / "stats.json"
        rc = main(
            ["--quiet", "classify", "--questions", store, "--out", str(out), "--stats", str(stats)]
        )
        assert rc == 0
        rows = [json.loads(l) for l in out.read_text().splitlines()]
        assert rows[0] == {
            "question_id": 1,
            "label": "PerceptionFlagged",
            "matched_rule": "how_many",
        }
        assert rows[1]["label"] == "ReasoningCandidate"
        doc = json.loads(stats.read_text())
        assert doc["ruleset_version"] == "top40-v1"
        assert doc["residue_pct"] == 50.0
        assert doc["manifest"]["seed"] == 0

    def test_vqa_style_questions_file(self, tmp_path):
        qfile = tmp_path / "questions.json"
        qfile.write_text(
            json.dumps(
                {"questions": [{"question_id": 7, "question": "What color is the cat?"}]}
            )
        )
        out = tmp_path / "labels.jsonl"
        rc = main(["--quiet", "classify", "--questions", str(qfile), "--out", str(out)])
        assert rc == 0
        assert json.loads(out.read_text())["matched_rule"] == "contains_color"

    def test_missing_input_exit_2(self, tmp_path):
        rc = main(
            ["--quiet", "classify", "--questions", str(tmp_path / "nope.jsonl"),
             "--out", str(tmp_path / "x")]
        )
        assert rc == 2

    def test_deterministic_output_bytes(self, tmp_path):
        store = write_store(
            tmp_path / "s.jsonl", [make_question(1, "How many dogs?", "2")]
        )
        outs = []
        for name in ("a", "b"):
            out = tmp_path / f"{name}.jsonl"
            stats = tmp_path / f"{name}.json"
            main(["--quiet", "classify", "--questions", store, "--out", str(out),
                  "--stats", str(stats)])
            outs.append(out.read_bytes() + stats.read_bytes())
        assert outs[0] == outs[1]


class TestFilter:
    def test_thresholds_applied(self, tmp_path):
        questions = [
            make_question(1, "Is it wet?", "", raw=["yes"] * 8 + ["no"] * 2),
            make_question(2, "Is it dry?", "", raw=["yes"] * 7 + ["no"] * 3),
            make_question(3, "Where is it?", "", raw=["beach"] * 5 + [f"x{i}" for i in range(5)]),
        ]
        links = [SubQuestionLink(1, 10, "a?", "x"), SubQuestionLink(2, 11, "b?", "y")]
        store = write_store(tmp_path / "in.jsonl", questions, links)
        out = tmp_path / "out.jsonl"
        rc = main(["--quiet", "filter", "--in", store, "--out", str(out)])
        assert rc == 0
        from squint.ingest import load_store

        kept = load_store(str(out))
        assert sorted(kept.questions) == [1, 3]
        # links whose main question was dropped go with it
        assert [l.main_question_id for l in kept.links] == [1]
        assert kept.provenance["filter_thresholds"]["binary_min_agree"] == 8

    def test_wrong_annotator_count_exit_2(self, tmp_path):
        store = write_store(
            tmp_path / "in.jsonl", [make_question(1, "Is it wet?", "", raw=["yes"] * 4)]
        )
        rc = main(["--quiet", "filter", "--in", store, "--out", str(tmp_path / "o")])
        assert rc == 2


class TestEvaluate:
    def test_report_contents(self, tmp_path, eval_inputs):
        store, mainp, subp = eval_inputs
        out = tmp_path / "report.json"
        rc = main(
            ["--quiet", "evaluate", "--main-preds", mainp, "--sub-preds", subp,
             "--links", store, "--out", str(out)]
        )
        assert rc == 0
        doc = json.loads(out.read_text())
        # main 1 correct + sub correct (Q1); main 2 wrong ("yes" vs "no") so
        # its two links are Q3/Q4 by sub correctness
        assert doc["counts"] == {"q1": 1, "q2": 0, "q3": 1, "q4": 1}
        assert doc["consistency_pct"] == 100.0
        assert doc["reasoning_accuracy_pct"] == 50.0
        assert doc["n_pairs"] == 3
        assert doc["manifest"]["inputs"]["main_preds"].startswith("sha256:")

    def test_svg_and_compare(self, tmp_path, eval_inputs):
        store, mainp, subp = eval_inputs
        out1 = tmp_path / "r1.json"
        main(["--quiet", "evaluate", "--main-preds", mainp, "--sub-preds", subp,
              "--links", store, "--out", str(out1)])
        svg_dir = tmp_path / "charts"
        rc = main(
            ["--quiet", "evaluate", "--main-preds", mainp, "--sub-preds", subp,
             "--links", store, "--out", str(tmp_path / "r2.json"),
             "--svg", str(svg_dir), "--compare", str(out1)]
        )
        assert rc == 0
        quad = (svg_dir / "quadrants.svg").read_text()
        comp = (svg_dir / "comparison.svg").read_text()
        assert quad.startswith("<svg") or "<svg" in quad
        assert "comparison" in comp.lower() or "<svg" in comp

    def test_empty_report_exit_1(self, tmp_path, eval_inputs):
        store, _, _ = eval_inputs
        empty = write_preds(tmp_path / "empty.jsonl", [])
        rc = main(
            ["--quiet", "evaluate", "--main-preds", empty, "--sub-preds", empty,
             "--links", store, "--out", str(tmp_path / "r.json")]
        )
        assert rc == 1

    def test_byte_identical_reruns(self, tmp_path, eval_inputs):
        store, mainp, subp = eval_inputs
        blobs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            main(["--quiet", "evaluate", "--main-preds", mainp, "--sub-preds", subp,
                  "--links", store, "--out", str(out)])
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1]


class TestAnalyze:
    def test_report_and_svg(self, tmp_path):
        questions = [
            make_question(1, "Is the banana ripe enough to eat?", "yes"),
            make_question(2, "How many dogs?", "2"),
        ]
        links = [SubQuestionLink(1, 10, "What color is the banana?", "yellow")]
        store = write_store(tmp_path / "s.jsonl", questions, links)
        out = tmp_path / "analysis.json"
        svg_dir = tmp_path / "charts"
        rc = main(
            ["--quiet", "analyze", "--questions", store, "--links", store,
             "--out", str(out), "--svg", str(svg_dir)]
        )
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["concept_overlap_pct"] == 100.0
        assert doc["length_histogram"] == {"3": 50.0, "7": 50.0}
        assert (svg_dir / "length_histogram.svg").exists()


class TestExperiment:
    def test_outputs_and_determinism(self, tmp_path):
        cfg = {
            "lr": 1.0,
            "epochs": 6,
            "seed": 0,
            "n_scenes": 12,
            "n_base_scenes": 16,
            "base_epochs": 12,
            "n_resamples": 5,
        }
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(cfg))
        outputs = []
        for name in ("run1", "run2"):
            out_dir = tmp_path / name
            rc = main(["--quiet", "experiment", "--config", str(cfg_path),
                       "--out", str(out_dir)])
            assert rc == 0
            blob = b""
            for f in sorted(os.listdir(out_dir)):
                blob += (out_dir / f).read_bytes()
            outputs.append((sorted(os.listdir(out_dir)), blob))
        expected_files = [
            "checkpoint_base.ckpt", "checkpoint_finetune.ckpt", "checkpoint_squint.ckpt",
            "config_echo.json",
            "report_base.json", "report_finetune.json", "report_squint.json",
            "train_base.csv", "train_finetune.csv", "train_squint.csv",
        ]
        assert outputs[0][0] == expected_files
        assert outputs[0] == outputs[1]
        doc = json.loads((tmp_path / "run1" / "report_squint.json").read_text())
        assert doc["variant"] == "squint"
        assert doc["schema_version"] == "1"

    def test_bad_config_exit_2(self, tmp_path):
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps({"lr": -5}))
        rc = main(["--quiet", "experiment", "--config", str(cfg_path),
                   "--out", str(tmp_path / "out")])
        assert rc == 2


class TestUsage:
    def test_unknown_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2
