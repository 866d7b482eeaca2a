"""Seeded synthetic scene corpus for the attention-alignment experiments.

Each scene has K regions, one of which is the target object. Region features
are a one-hot object type, a one-hot color, plus small seeded noise. Every
scene yields a (main, sub) question pair:

* sub question:  "what color is the <type>" -> the target region's color
* main question: "is the <type> ripe"       -> yes/no by a fixed rule table

The ripeness table is the reasoning step the model must learn:
banana -> yellow, tomato -> red, apple -> red, pear -> green.

Base examples are color-only questions over separate scenes; they play the
role of the original training distribution when batches are mixed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

OBJECT_TYPES = ("banana", "tomato", "apple", "pear")
COLORS = ("yellow", "red", "green", "brown")

#: Color at which each object type counts as ripe.
RIPE_COLORS = {"banana": "yellow", "tomato": "red", "apple": "red", "pear": "green"}

ANSWERS = ("yes", "no") + COLORS

K_REGIONS = 6
D_V = len(OBJECT_TYPES) + len(COLORS)  # 8
NOISE_SCALE = 0.1


@dataclass(frozen=True)
class SceneSpec:
    features: np.ndarray  # (K, d_v)
    region_meta: tuple[tuple[str, str], ...]  # (object_type, color) per region


@dataclass(frozen=True)
class QAExample:
    scene_index: int
    main_tokens: tuple[int, ...]
    main_answer_id: int
    sub_tokens: tuple[int, ...]
    sub_answer_id: int
    oracle_region: int
    main_text: str
    sub_text: str


@dataclass(frozen=True)
class BaseExample:
    scene_index: int
    tokens: tuple[int, ...]
    answer_id: int
    oracle_region: int
    text: str


@dataclass
class Corpus:
    scenes: list[SceneSpec]
    qa_examples: list[QAExample]
    base_examples: list[BaseExample]
    vocab: dict[str, int]
    answers: tuple[str, ...] = ANSWERS

    def encode(self, tokens: Sequence[str]) -> tuple[int, ...]:
        try:
            return tuple(self.vocab[t] for t in tokens)
        except KeyError as exc:
            raise KeyError(f"token not in corpus vocabulary: {exc.args[0]!r}") from exc


def _build_vocab() -> dict[str, int]:
    words = ["what", "color", "is", "the", "ripe"] + list(OBJECT_TYPES)
    return {w: i for i, w in enumerate(words)}


def _region_features(obj_type: str, color: str, rng: np.random.Generator) -> np.ndarray:
    feat = np.zeros(D_V)
    feat[OBJECT_TYPES.index(obj_type)] = 1.0
    feat[len(OBJECT_TYPES) + COLORS.index(color)] = 1.0
    return feat + NOISE_SCALE * rng.standard_normal(D_V)


def _make_scene(rng: np.random.Generator) -> tuple[SceneSpec, int]:
    """One scene with a single target object and K-1 distractors."""
    target_type = OBJECT_TYPES[rng.integers(len(OBJECT_TYPES))]
    target_color = COLORS[rng.integers(len(COLORS))]
    target_region = int(rng.integers(K_REGIONS))
    meta = []
    feats = np.zeros((K_REGIONS, D_V))
    other_types = [t for t in OBJECT_TYPES if t != target_type]
    for k in range(K_REGIONS):
        if k == target_region:
            t, c = target_type, target_color
        else:
            t = other_types[rng.integers(len(other_types))]
            c = COLORS[rng.integers(len(COLORS))]
        meta.append((t, c))
        feats[k] = _region_features(t, c, rng)
    return SceneSpec(features=feats, region_meta=tuple(meta)), target_region


def main_answer_for(obj_type: str, color: str) -> str:
    return "yes" if RIPE_COLORS[obj_type] == color else "no"


def gen_synthetic_corpus(
    seed: int, n_scenes: int, n_base_scenes: int = 0
) -> Corpus:
    """Deterministically generate scenes, question pairs, and base examples."""
    if n_scenes < 1:
        raise ValueError("n_scenes must be >= 1")
    rng = np.random.default_rng(seed)
    vocab = _build_vocab()
    answer_index = {a: i for i, a in enumerate(ANSWERS)}

    scenes: list[SceneSpec] = []
    qa: list[QAExample] = []
    base: list[BaseExample] = []

    def encode(tokens: list[str]) -> tuple[int, ...]:
        return tuple(vocab[t] for t in tokens)

    for i in range(n_scenes):
        scene, target_region = _make_scene(rng)
        scenes.append(scene)
        t, c = scene.region_meta[target_region]
        sub_text = f"what color is the {t}"
        main_text = f"is the {t} ripe"
        qa.append(
            QAExample(
                scene_index=i,
                main_tokens=encode(main_text.split()),
                main_answer_id=answer_index[main_answer_for(t, c)],
                sub_tokens=encode(sub_text.split()),
                sub_answer_id=answer_index[c],
                oracle_region=target_region,
                main_text=main_text,
                sub_text=sub_text,
            )
        )

    for i in range(n_base_scenes):
        scene, target_region = _make_scene(rng)
        scenes.append(scene)
        t, c = scene.region_meta[target_region]
        text = f"what color is the {t}"
        base.append(
            BaseExample(
                scene_index=n_scenes + i,
                tokens=encode(text.split()),
                answer_id=answer_index[c],
                oracle_region=target_region,
                text=text,
            )
        )

    return Corpus(scenes=scenes, qa_examples=qa, base_examples=base, vocab=vocab)
