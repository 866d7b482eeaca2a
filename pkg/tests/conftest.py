import json
import os

import pytest

from squint.core import AnswerSet, QuestionRecord

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def make_question(qid, text, majority, raw=None, image_id=0):
    answers = (
        AnswerSet.from_raw(raw) if raw is not None else AnswerSet.from_single(majority)
    )
    return QuestionRecord(question_id=qid, image_id=image_id, text=text, answers=answers)


@pytest.fixture
def rule_fixture():
    with open(os.path.join(FIXTURES, "rule_labels.json")) as fh:
        return json.load(fh)
