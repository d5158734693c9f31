"""Contrastive training of the dual encoders.

Default loss is symmetric InfoNCE at temperature 0.07; a max-margin triplet
variant (margin 0.2) sits behind the loss switch. Recall is measured on a
held-out split where a retrieved asset counts as correct when it belongs to
the query caption's class (captions are class-level descriptions).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..engine.autograd import Tensor, log, matmul, relu, softmax, sum_, transpose
from ..engine.optim import Adam
from ..errors import DataError, DomainError, ValidationError
from ..types import AudioAsset
from .encoders import RetrievalModel, pool_audio
from .mel import mel_features

DEFAULT_TAU = 0.07
DEFAULT_MARGIN = 0.2
LOSS_KINDS = ("infonce", "margin")


def contrastive_loss(text_embs: Tensor, audio_embs: Tensor, tau: float = DEFAULT_TAU) -> Tensor:
    """Symmetric InfoNCE over in-batch negatives; rows are matched pairs."""
    if tau <= 0:
        raise DomainError(f"temperature must be positive, got {tau}")
    if text_embs.shape != audio_embs.shape:
        raise ValidationError(
            f"batch shapes differ: {text_embs.shape} vs {audio_embs.shape}", ["audio_embs"]
        )
    n = text_embs.shape[0]
    logits = matmul(text_embs, transpose(audio_embs, (1, 0))) * (1.0 / tau)
    eye = Tensor(np.eye(n, dtype=logits.dtype))
    p_rows = sum_(softmax(logits, axis=1) * eye, axis=1)
    p_cols = sum_(softmax(logits, axis=0) * eye, axis=0)
    ce_rows = -log(p_rows).mean()
    ce_cols = -log(p_cols).mean()
    return (ce_rows + ce_cols) * 0.5


def margin_loss(text_embs: Tensor, audio_embs: Tensor, margin: float = DEFAULT_MARGIN) -> Tensor:
    """Symmetric sum-of-violations triplet hinge over in-batch negatives."""
    if text_embs.shape != audio_embs.shape:
        raise ValidationError(
            f"batch shapes differ: {text_embs.shape} vs {audio_embs.shape}", ["audio_embs"]
        )
    n = text_embs.shape[0]
    scores = matmul(text_embs, transpose(audio_embs, (1, 0)))
    eye = np.eye(n, dtype=scores.dtype)
    diag = sum_(scores * Tensor(eye), axis=1, keepdims=True)
    off = Tensor(1.0 - eye)
    viol_rows = relu((scores - diag + margin) * off)
    viol_cols = relu((scores - transpose(diag, (1, 0)) + margin) * off)
    denom = max(n * (n - 1), 1)
    return (viol_rows.sum() + viol_cols.sum()) * (0.5 / denom)


@dataclass
class RetrievalReport:
    epochs: int
    losses: list[float]
    recall_at_1: float
    recall_at_3: float
    wall_time_s: float
    loss_kind: str


def _split(assets: list[AudioAsset], rng: np.random.Generator, holdout_per_class: int):
    by_class: dict[str, list[AudioAsset]] = {}
    for a in assets:
        by_class.setdefault(a.class_id, []).append(a)
    train, held = [], []
    for cid in sorted(by_class):
        group = by_class[cid]
        order = rng.permutation(len(group))
        k = min(holdout_per_class, max(len(group) - 1, 0))
        held.extend(group[i] for i in order[:k])
        train.extend(group[i] for i in order[k:])
    return train, held


def _recall(model: RetrievalModel, held: list[AudioAsset], k: int) -> float:
    if not held:
        return float("nan")
    audio = np.stack([model.encode_waveform(a.waveform) for a in held])
    hits = 0
    for a in held:
        q = model.encode_text(a.caption)
        scores = audio @ q
        order = sorted(range(len(held)), key=lambda i: (-scores[i], held[i].asset_id))
        hits += any(held[i].class_id == a.class_id for i in order[:k])
    return hits / len(held)


def train_retrieval(
    bank: list[AudioAsset],
    epochs: int = 50,
    tau: float = DEFAULT_TAU,
    seed: int = 0,
    loss_kind: str = "infonce",
    margin: float = DEFAULT_MARGIN,
    learning_rate: float = 2e-3,
    holdout_per_class: int = 2,
    progress=None,
) -> tuple[RetrievalModel, RetrievalReport]:
    if loss_kind not in LOSS_KINDS:
        raise ValidationError(f"unknown loss kind {loss_kind!r}", ["loss_kind"])
    classes = {a.class_id for a in bank}
    if len(classes) < 2:
        raise DataError("contrastive training needs at least 2 classes in the bank")

    rng = np.random.default_rng(seed)
    train, held = _split(bank, rng, holdout_per_class)
    model = RetrievalModel.build([a.caption for a in bank], seed=seed)
    pooled = np.stack([pool_audio(mel_features(a.waveform)) for a in train])
    ids = [model.vocab.encode(a.caption) for a in train]

    names = model.store.names()
    opt = Adam(names, model.store, lr=learning_rate)
    losses: list[float] = []
    t0 = time.monotonic()
    for epoch in range(epochs):
        order = rng.permutation(len(train))
        P = model.store.tensors(frozenset({"encoder_text", "encoder_audio"}))
        t_emb = model.text_forward(P, [ids[i] for i in order])
        a_emb = model.audio_forward(P, pooled[order])
        if loss_kind == "infonce":
            loss = contrastive_loss(t_emb, a_emb, tau)
        else:
            loss = margin_loss(t_emb, a_emb, margin)
        loss.backward()
        opt.step({n: P[n].grad for n in names if P[n].grad is not None})
        losses.append(float(loss.data.reshape(())))
        if progress is not None:
            progress(epoch + 1, epochs, losses[-1])

    report = RetrievalReport(
        epochs=epochs,
        losses=losses,
        recall_at_1=_recall(model, held, 1),
        recall_at_3=_recall(model, held, 3),
        wall_time_s=time.monotonic() - t0,
        loss_kind=loss_kind,
    )
    return model, report
