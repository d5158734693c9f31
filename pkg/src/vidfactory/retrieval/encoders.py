"""Dual text/audio encoders onto a shared 64-dim unit sphere.

Text: bag-of-tokens mean embedding -> 2-layer MLP -> L2 normalize. The bag
makes token order irrelevant by construction.
Audio: per-band mean and population std pooled over mel frames (64 values)
-> 2-layer MLP -> L2 normalize. Population std (ddof=0) keeps the pooled
vector invariant under frame duplication.
"""

from __future__ import annotations

import numpy as np

from ..diffusion.text import NULL_TOKEN, UNK_TOKEN, Vocab
from ..engine.autograd import Tensor, embedding, power, silu
from ..engine.functional import linear
from ..errors import FormatError, LengthError
from ..params import ParamStore, load_checkpoint, save_checkpoint
from .mel import N_BANDS, mel_features

EMBED_DIM = 64
HIDDEN_DIM = 64


def build_caption_vocab(captions: list[str]) -> Vocab:
    words: list[str] = []
    for c in captions:
        words.extend(c.lower().split())
    return Vocab(sorted(set(words)))


def init_retrieval_params(vocab: Vocab, seed: int = 0) -> ParamStore:
    store = ParamStore()
    rng = np.random.default_rng(seed)

    def mat(name: str, din: int, dout: int, group: str):
        w = rng.normal(0.0, np.sqrt(1.0 / din), size=(din, dout)).astype(np.float32)
        store.add(name, w, group)

    mat("text.table", len(vocab), EMBED_DIM, "encoder_text")
    mat("text.w1", EMBED_DIM, HIDDEN_DIM, "encoder_text")
    store.add("text.b1", np.zeros(HIDDEN_DIM, dtype=np.float32), "encoder_text")
    mat("text.w2", HIDDEN_DIM, EMBED_DIM, "encoder_text")
    store.add("text.b2", np.zeros(EMBED_DIM, dtype=np.float32), "encoder_text")

    mat("audio.w1", 2 * N_BANDS, HIDDEN_DIM, "encoder_audio")
    store.add("audio.b1", np.zeros(HIDDEN_DIM, dtype=np.float32), "encoder_audio")
    mat("audio.w2", HIDDEN_DIM, EMBED_DIM, "encoder_audio")
    store.add("audio.b2", np.zeros(EMBED_DIM, dtype=np.float32), "encoder_audio")
    return store


def _l2_rows(x: Tensor) -> Tensor:
    sq = (x * x).sum(axis=-1, keepdims=True)
    return x * power(sq + 1e-12, -0.5)


def pool_audio(feature: np.ndarray) -> np.ndarray:
    """(frames, 32) mel matrix -> 64 pooled values (mean ++ population std)."""
    feature = np.asarray(feature, dtype=np.float32)
    if feature.ndim != 2 or feature.shape[1] != N_BANDS:
        raise LengthError(f"expected (frames, {N_BANDS}) feature, got {feature.shape}")
    if feature.shape[0] < 1:
        raise LengthError("feature needs at least one frame")
    mean = feature.mean(axis=0)
    std = feature.std(axis=0)  # ddof=0: duplication-invariant
    return np.concatenate([mean, std]).astype(np.float32)


class RetrievalModel:
    """Parameter store plus the caption vocabulary it was built against."""

    def __init__(self, store: ParamStore, vocab: Vocab):
        self.store = store
        self.vocab = vocab

    @classmethod
    def build(cls, captions: list[str], seed: int = 0) -> "RetrievalModel":
        vocab = build_caption_vocab(captions)
        return cls(init_retrieval_params(vocab, seed), vocab)

    # -- autograd paths (training) ----------------------------------------------

    def text_forward(self, P: dict[str, Tensor], ids_per_item: list[np.ndarray]) -> Tensor:
        from ..engine.autograd import concat, mean

        rows = [
            mean(embedding(P["text.table"], ids), axis=0, keepdims=True)
            for ids in ids_per_item
        ]
        bag = concat(rows, 0) if len(rows) > 1 else rows[0]
        h = silu(linear(bag, P["text.w1"], P["text.b1"]))
        return _l2_rows(linear(h, P["text.w2"], P["text.b2"]))

    def audio_forward(self, P: dict[str, Tensor], pooled: np.ndarray) -> Tensor:
        h = silu(linear(Tensor(np.asarray(pooled, dtype=np.float32)), P["audio.w1"], P["audio.b1"]))
        return _l2_rows(linear(h, P["audio.w2"], P["audio.b2"]))

    # -- inference ---------------------------------------------------------------

    def encode_text(self, caption: str) -> np.ndarray:
        ids = self.vocab.encode(caption)  # conditioning error when empty
        out = self.text_forward(self.store.tensors(), [ids])
        return out.data[0].astype(np.float32)

    def encode_audio(self, feature: np.ndarray) -> np.ndarray:
        pooled = pool_audio(feature)[None]
        out = self.audio_forward(self.store.tensors(), pooled)
        return out.data[0].astype(np.float32)

    def encode_waveform(self, waveform: np.ndarray) -> np.ndarray:
        return self.encode_audio(mel_features(waveform))

    # -- persistence ------------------------------------------------------------

    def save(self, path) -> None:
        meta = {"kind": "retrieval", "vocab": self.vocab.tokens[2:]}
        save_checkpoint(path, self.store, meta)

    @classmethod
    def load(cls, path) -> "RetrievalModel":
        store, meta = load_checkpoint(path)
        if meta.get("kind") != "retrieval":
            raise FormatError(f"checkpoint holds {meta.get('kind')!r}, expected 'retrieval'")
        vocab = Vocab(meta["vocab"])
        if vocab.tokens[:2] != [NULL_TOKEN, UNK_TOKEN]:
            raise FormatError("vocabulary lost its reserved tokens")
        return cls(store, vocab)
