"""A minimal one-layer attention VQA network with exact analytic gradients.

Forward pass, per question:

    qvec    = mean of token embeddings
    score_k = w . tanh(W_v v_k + W_q qvec + b)      for each region k
    alpha   = softmax(scores)
    att     = sum_k alpha_k v_k
    z       = tanh(W_f [att ; qvec] + b_f)
    logits  = W_o z + b_o
    probs   = sigmoid(logits)

Two training losses are supported: plain finetuning (average of the two
questions' own sigmoid cross-entropies) and the attention-alignment loss,
which adds an MSE between the two questions' attention vectors and evaluates
the main answer head on the sub-question's attention:

    total = MSE(alpha_main, alpha_sub)
          + lambda1 * BCE(main answer | alpha_sub)
          + lambda2 * BCE(sub answer)

Backpropagation is written out by hand; tests verify it against central
finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..core import DomainError


class NonFiniteError(DomainError):
    """A non-finite value appeared during the forward/backward pass."""

    def __init__(self, path: str):
        self.path = path
        super().__init__(f"non-finite value at {path}")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ModelSizes:
    n_vocab: int
    n_answers: int
    d_q: int = 16
    d_v: int = 8
    h: int = 12
    d_f: int = 16


_PARAM_FIELDS = ("E", "W_v", "W_q", "b", "w", "W_f", "b_f", "W_o", "b_o")


@dataclass
class ModelParams:
    E: np.ndarray  # (n_vocab, d_q) token embeddings
    W_v: np.ndarray  # (h, d_v)
    W_q: np.ndarray  # (h, d_q)
    b: np.ndarray  # (h,)
    w: np.ndarray  # (h,)
    W_f: np.ndarray  # (d_f, d_v + d_q)
    b_f: np.ndarray  # (d_f,)
    W_o: np.ndarray  # (n_answers, d_f)
    b_o: np.ndarray  # (n_answers,)

    def zeros_like(self) -> "ModelParams":
        return ModelParams(**{f: np.zeros_like(getattr(self, f)) for f in _PARAM_FIELDS})

    def copy(self) -> "ModelParams":
        return ModelParams(**{f: getattr(self, f).copy() for f in _PARAM_FIELDS})

    def iadd_scaled(self, other: "ModelParams", scale: float) -> None:
        for f in _PARAM_FIELDS:
            getattr(self, f).__iadd__(scale * getattr(other, f))

    def scale(self, factor: float) -> None:
        for f in _PARAM_FIELDS:
            getattr(self, f).__imul__(factor)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([getattr(self, f).ravel() for f in _PARAM_FIELDS])

    def from_vector(self, vec: np.ndarray) -> "ModelParams":
        out = {}
        pos = 0
        for f in _PARAM_FIELDS:
            arr = getattr(self, f)
            out[f] = vec[pos : pos + arr.size].reshape(arr.shape).copy()
            pos += arr.size
        return ModelParams(**out)

    def coord_name(self, flat_index: int) -> str:
        """Human-readable path for a flattened coordinate, for error messages."""
        pos = 0
        for f in _PARAM_FIELDS:
            arr = getattr(self, f)
            if flat_index < pos + arr.size:
                return f"{f}[{np.unravel_index(flat_index - pos, arr.shape)}]"
            pos += arr.size
        raise IndexError(flat_index)

    def check_finite(self) -> None:
        for f in _PARAM_FIELDS:
            if not np.all(np.isfinite(getattr(self, f))):
                raise NonFiniteError(f)


def init_params(sizes: ModelSizes, rng: np.random.Generator) -> ModelParams:
    """Uniform init in [-0.05, 0.05], fully determined by the generator."""

    def u(*shape):
        return rng.uniform(-0.05, 0.05, size=shape)

    return ModelParams(
        E=u(sizes.n_vocab, sizes.d_q),
        W_v=u(sizes.h, sizes.d_v),
        W_q=u(sizes.h, sizes.d_q),
        b=u(sizes.h),
        w=u(sizes.h),
        W_f=u(sizes.d_f, sizes.d_v + sizes.d_q),
        b_f=u(sizes.d_f),
        W_o=u(sizes.n_answers, sizes.d_f),
        b_o=u(sizes.n_answers),
    )


@dataclass
class ForwardTrace:
    token_ids: tuple[int, ...]
    qvec: np.ndarray
    pre: np.ndarray  # (K, h) scorer pre-activation
    U: np.ndarray  # tanh(pre)
    scores: np.ndarray  # (K,)
    alpha: np.ndarray  # (K,) softmax weights
    attended: np.ndarray  # (d_v,)
    cat: np.ndarray  # [attended ; qvec]
    z: np.ndarray  # (d_f,)
    logits: np.ndarray  # (n_answers,)
    probs: np.ndarray


def forward(params: ModelParams, V: np.ndarray, token_ids: Sequence[int]) -> ForwardTrace:
    """Full forward pass over the K region features in ``V`` (K x d_v)."""
    if len(token_ids) == 0:
        raise ValueError("empty token sequence")
    if max(token_ids) >= params.E.shape[0] or min(token_ids) < 0:
        raise KeyError(f"token id out of vocabulary: {token_ids}")
    qvec = params.E[list(token_ids)].mean(axis=0)
    pre = V @ params.W_v.T + params.W_q @ qvec + params.b  # (K, h)
    U = np.tanh(pre)
    scores = U @ params.w
    shifted = scores - scores.max()
    e = np.exp(shifted)
    alpha = e / e.sum()
    attended = alpha @ V
    cat = np.concatenate([attended, qvec])
    z = np.tanh(params.W_f @ cat + params.b_f)
    logits = params.W_o @ z + params.b_o
    if not np.all(np.isfinite(logits)):
        raise NonFiniteError("logits")
    probs = 1.0 / (1.0 + np.exp(-logits))
    return ForwardTrace(
        token_ids=tuple(token_ids),
        qvec=qvec,
        pre=pre,
        U=U,
        scores=scores,
        alpha=alpha,
        attended=attended,
        cat=cat,
        z=z,
        logits=logits,
        probs=probs,
    )


def _bce(probs: np.ndarray, target_id: int) -> float:
    """Sigmoid cross-entropy against a one-hot target, averaged over answers."""
    y = np.zeros_like(probs)
    y[target_id] = 1.0
    eps = 1e-12
    losses = -(y * np.log(probs + eps) + (1.0 - y) * np.log(1.0 - probs + eps))
    return float(losses.mean())


def _bce_dlogits(probs: np.ndarray, target_id: int) -> np.ndarray:
    y = np.zeros_like(probs)
    y[target_id] = 1.0
    return (probs - y) / probs.size


@dataclass(frozen=True)
class LossBreakdown:
    mse_attn: float
    bce_main_given_sub_attn: float
    bce_sub: float
    total: float


def _backward_head(
    params: ModelParams,
    cat: np.ndarray,
    z: np.ndarray,
    d_logits: np.ndarray,
    grads: ModelParams,
    d_v: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Backprop through the fusion + answer head; returns (d_attended, d_qvec)."""
    grads.W_o += np.outer(d_logits, z)
    grads.b_o += d_logits
    dz = params.W_o.T @ d_logits
    da = dz * (1.0 - z**2)
    grads.W_f += np.outer(da, cat)
    grads.b_f += da
    dcat = params.W_f.T @ da
    return dcat[:d_v], dcat[d_v:]


def _backward_attention(
    params: ModelParams,
    V: np.ndarray,
    trace: ForwardTrace,
    d_alpha: np.ndarray,
    grads: ModelParams,
) -> np.ndarray:
    """Backprop through the scorer and softmax; returns d_qvec."""
    alpha = trace.alpha
    ds = alpha * (d_alpha - float(d_alpha @ alpha))
    grads.w += trace.U.T @ ds
    dU = np.outer(ds, params.w)
    dpre = dU * (1.0 - trace.U**2)
    grads.W_v += dpre.T @ V
    dpre_sum = dpre.sum(axis=0)
    grads.W_q += np.outer(dpre_sum, trace.qvec)
    grads.b += dpre_sum
    return params.W_q.T @ dpre_sum


def _backward_embeddings(
    token_ids: Sequence[int], d_qvec: np.ndarray, grads: ModelParams
) -> None:
    scale = 1.0 / len(token_ids)
    for t in token_ids:
        grads.E[t] += scale * d_qvec


def squint_loss(
    params: ModelParams,
    V: np.ndarray,
    main_tokens: Sequence[int],
    sub_tokens: Sequence[int],
    gt_main: int,
    gt_sub: int,
    lambda1: float = 0.1,
    lambda2: float = 1.0,
    grads: Optional[ModelParams] = None,
    grad_scale: float = 1.0,
) -> LossBreakdown:
    """Attention-alignment loss; accumulates gradients into ``grads`` if given.

    The MSE term is the mean squared difference of the two attention vectors.
    The main-answer cross-entropy is evaluated with the sub-question's
    attention (the main question's own head output is unused).
    """
    if lambda1 < 0 or lambda2 < 0:
        raise ConfigError("loss weights must be non-negative")
    tr_main = forward(params, V, main_tokens)
    tr_sub = forward(params, V, sub_tokens)
    K = V.shape[0]
    d_v = V.shape[1]

    diff = tr_main.alpha - tr_sub.alpha
    mse = float(np.mean(diff**2))

    # main answer head, driven by the sub-question's attention
    att_x = tr_sub.alpha @ V
    cat_x = np.concatenate([att_x, tr_main.qvec])
    z_x = np.tanh(params.W_f @ cat_x + params.b_f)
    logits_x = params.W_o @ z_x + params.b_o
    probs_x = 1.0 / (1.0 + np.exp(-logits_x))
    bce_main = _bce(probs_x, gt_main)
    bce_sub = _bce(tr_sub.probs, gt_sub)
    total = mse + lambda1 * bce_main + lambda2 * bce_sub

    if grads is not None:
        g = grad_scale
        d_alpha_main = g * 2.0 * diff / K
        d_alpha_sub = -g * 2.0 * diff / K

        d_att_x, d_qvec_main = _backward_head(
            params, cat_x, z_x, g * lambda1 * _bce_dlogits(probs_x, gt_main), grads, d_v
        )
        d_alpha_sub = d_alpha_sub + V @ d_att_x

        d_att_sub, d_qvec_sub = _backward_head(
            params,
            tr_sub.cat,
            tr_sub.z,
            g * lambda2 * _bce_dlogits(tr_sub.probs, gt_sub),
            grads,
            d_v,
        )
        d_alpha_sub = d_alpha_sub + V @ d_att_sub

        d_qvec_main = d_qvec_main + _backward_attention(params, V, tr_main, d_alpha_main, grads)
        d_qvec_sub = d_qvec_sub + _backward_attention(params, V, tr_sub, d_alpha_sub, grads)
        _backward_embeddings(main_tokens, d_qvec_main, grads)
        _backward_embeddings(sub_tokens, d_qvec_sub, grads)

    return LossBreakdown(
        mse_attn=mse, bce_main_given_sub_attn=bce_main, bce_sub=bce_sub, total=total
    )


def single_question_loss(
    params: ModelParams,
    V: np.ndarray,
    tokens: Sequence[int],
    gt: int,
    grads: Optional[ModelParams] = None,
    grad_scale: float = 1.0,
) -> float:
    """Cross-entropy of one question with its own attention."""
    tr = forward(params, V, tokens)
    loss = _bce(tr.probs, gt)
    if grads is not None:
        d_att, d_qvec = _backward_head(
            params, tr.cat, tr.z, grad_scale * _bce_dlogits(tr.probs, gt), grads, V.shape[1]
        )
        d_alpha = V @ d_att
        d_qvec = d_qvec + _backward_attention(params, V, tr, d_alpha, grads)
        _backward_embeddings(tokens, d_qvec, grads)
    return loss


def plain_finetune_loss(
    params: ModelParams,
    V: np.ndarray,
    main_tokens: Sequence[int],
    sub_tokens: Sequence[int],
    gt_main: int,
    gt_sub: int,
    grads: Optional[ModelParams] = None,
    grad_scale: float = 1.0,
) -> float:
    """Average of the two questions' own cross-entropies."""
    l_main = single_question_loss(params, V, main_tokens, gt_main, grads, 0.5 * grad_scale)
    l_sub = single_question_loss(params, V, sub_tokens, gt_sub, grads, 0.5 * grad_scale)
    return 0.5 * (l_main + l_sub)


# batch items: ("pair", V, main_tokens, sub_tokens, gt_main, gt_sub) or
#              ("single", V, tokens, gt)
BatchItem = tuple


def batch_loss_and_grad(
    params: ModelParams,
    batch: Sequence[BatchItem],
    loss_kind: str,
    lambda1: float = 0.1,
    lambda2: float = 1.0,
    want_grads: bool = True,
) -> tuple[dict, Optional[ModelParams]]:
    """Mean loss (with term breakdown) and its gradient over a mixed batch.

    ``pair`` items use the configured loss kind; ``single`` items (the base
    corpus mixed into each batch) contribute only their own cross-entropy.
    """
    if loss_kind not in ("plain", "squint"):
        raise ConfigError(f"unknown loss kind {loss_kind!r}")
    if not batch:
        raise ValueError("empty batch")
    grads = params.zeros_like() if want_grads else None
    n = len(batch)
    scale = 1.0 / n
    totals = {"loss_total": 0.0, "loss_mse": 0.0, "loss_bce_main": 0.0, "loss_bce_sub": 0.0}
    for item in batch:
        if item[0] == "single":
            _, V, tokens, gt = item
            loss = single_question_loss(params, V, tokens, gt, grads, scale)
            totals["loss_total"] += loss
        elif loss_kind == "squint":
            _, V, mt, st, gm, gs = item
            br = squint_loss(params, V, mt, st, gm, gs, lambda1, lambda2, grads, scale)
            totals["loss_total"] += br.total
            totals["loss_mse"] += br.mse_attn
            totals["loss_bce_main"] += br.bce_main_given_sub_attn
            totals["loss_bce_sub"] += br.bce_sub
        else:
            _, V, mt, st, gm, gs = item
            loss = plain_finetune_loss(params, V, mt, st, gm, gs, grads, scale)
            totals["loss_total"] += loss
    for k in totals:
        totals[k] *= scale
    if not math.isfinite(totals["loss_total"]):
        raise NonFiniteError("batch loss")
    return totals, grads
