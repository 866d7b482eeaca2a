"""Deterministic SGD training with base-corpus batch mixing, plus checkpoints."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from ..core import DomainError
from .corpus import BaseExample, Corpus, QAExample
from .model import ModelParams, batch_loss_and_grad


class DivergenceError(DomainError):
    """Training loss went non-finite; carries the last finite parameters."""

    def __init__(self, epoch: int, last_good: ModelParams):
        self.epoch = epoch
        self.last_good = last_good
        super().__init__(f"training diverged at epoch {epoch}")


@dataclass(frozen=True)
class TrainConfig:
    lambda1: float = 0.1
    lambda2: float = 1.0
    lr: float = 0.01
    epochs: int = 40
    batch_size: int = 8
    seed: int = 0
    #: fraction of each batch drawn from the base corpus
    vqa_mix_ratio: float = 0.25

    def __post_init__(self) -> None:
        if self.lr < 0:
            raise ValueError("lr must be >= 0")
        if not (0.0 <= self.vqa_mix_ratio <= 1.0):
            raise ValueError("vqa_mix_ratio must be in [0, 1]")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("loss weights must be non-negative")


def _pair_item(corpus: Corpus, ex: QAExample):
    V = corpus.scenes[ex.scene_index].features
    return ("pair", V, ex.main_tokens, ex.sub_tokens, ex.main_answer_id, ex.sub_answer_id)


def _single_item(corpus: Corpus, ex: BaseExample):
    V = corpus.scenes[ex.scene_index].features
    return ("single", V, ex.tokens, ex.answer_id)


def train(
    params: ModelParams,
    corpus: Corpus,
    examples: Sequence[QAExample],
    base_examples: Sequence[BaseExample],
    config: TrainConfig,
    loss_kind: str,
) -> tuple[ModelParams, list[dict]]:
    """Plain SGD over shuffled batches; returns (new params, per-epoch log).

    Every batch is augmented with ceil(vqa_mix_ratio * batch_size) examples
    drawn from the base corpus, which contribute only their own-question
    cross-entropy. Fully deterministic in (params, config, corpora).
    """
    if not examples:
        raise ValueError("examples must be non-empty")
    params = params.copy()
    rng = np.random.default_rng(config.seed)
    n_mix = math.ceil(config.vqa_mix_ratio * config.batch_size) if base_examples else 0
    log: list[dict] = []
    last_good = params.copy()
    for epoch in range(config.epochs):
        order = rng.permutation(len(examples))
        epoch_totals = {"loss_total": 0.0, "loss_mse": 0.0, "loss_bce_main": 0.0, "loss_bce_sub": 0.0}
        n_batches = 0
        for start in range(0, len(examples), config.batch_size):
            batch = [_pair_item(corpus, examples[i]) for i in order[start : start + config.batch_size]]
            if n_mix:
                picks = rng.integers(len(base_examples), size=n_mix)
                batch.extend(_single_item(corpus, base_examples[i]) for i in picks)
            try:
                totals, grads = batch_loss_and_grad(
                    params, batch, loss_kind, config.lambda1, config.lambda2
                )
            except DomainError:
                raise DivergenceError(epoch, last_good)
            params.iadd_scaled(grads, -config.lr)
            for k in epoch_totals:
                epoch_totals[k] += totals[k]
            n_batches += 1
        row = {"epoch": epoch}
        row.update({k: v / n_batches for k, v in epoch_totals.items()})
        if not math.isfinite(row["loss_total"]):
            raise DivergenceError(epoch, last_good)
        last_good = params.copy()
        log.append(row)
    return params, log


def train_single(
    params: ModelParams,
    corpus: Corpus,
    base_examples: Sequence[BaseExample],
    config: TrainConfig,
) -> tuple[ModelParams, list[dict]]:
    """Train on base (single-question) examples only; used for the base model."""
    if not base_examples:
        raise ValueError("base_examples must be non-empty")
    params = params.copy()
    rng = np.random.default_rng(config.seed)
    log: list[dict] = []
    last_good = params.copy()
    for epoch in range(config.epochs):
        order = rng.permutation(len(base_examples))
        total = 0.0
        n_batches = 0
        for start in range(0, len(base_examples), config.batch_size):
            batch = [_single_item(corpus, base_examples[i]) for i in order[start : start + config.batch_size]]
            totals, grads = batch_loss_and_grad(params, batch, "plain", want_grads=True)
            params.iadd_scaled(grads, -config.lr)
            total += totals["loss_total"]
            n_batches += 1
        mean = total / n_batches
        if not math.isfinite(mean):
            raise DivergenceError(epoch, last_good)
        last_good = params.copy()
        log.append(
            {"epoch": epoch, "loss_total": mean, "loss_mse": 0.0, "loss_bce_main": 0.0, "loss_bce_sub": mean}
        )
    return params, log


LOG_COLUMNS = ("epoch", "loss_total", "loss_mse", "loss_bce_main", "loss_bce_sub")


def log_to_csv(log: Sequence[dict]) -> str:
    lines = [",".join(LOG_COLUMNS)]
    for row in log:
        lines.append(
            ",".join(
                str(row["epoch"]) if c == "epoch" else f"{row[c]:.10g}" for c in LOG_COLUMNS
            )
        )
    return "\n".join(lines) + "\n"


CHECKPOINT_VERSION = 1


def save_params(params: ModelParams, path: str) -> None:
    """JSON shape header, newline, then little-endian float64 payload."""
    from .model import _PARAM_FIELDS

    header = {
        "version": CHECKPOINT_VERSION,
        "fields": [[f, list(getattr(params, f).shape)] for f in _PARAM_FIELDS],
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        for f in _PARAM_FIELDS:
            fh.write(np.ascontiguousarray(getattr(params, f), dtype="<f8").tobytes())


def load_params(path: str) -> ModelParams:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        if header.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {header.get('version')}")
        arrays = {}
        for name, shape in header["fields"]:
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * 8)
            arrays[name] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
    return ModelParams(**arrays)
