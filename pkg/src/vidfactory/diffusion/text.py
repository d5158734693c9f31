"""Toy-grammar tokenizer and caption conditioning.

The vocabulary is closed over the caption grammar; unknown words degrade to
UNK instead of failing. The reserved NULL caption (pass None) maps to a
single learned null token, which is what classifier-free guidance drops to.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConditioningError
from ..toygen.video import COLORS, DIRECTIONS, SHAPES

NULL_CAPTION = None

NULL_TOKEN = "<null>"
UNK_TOKEN = "<unk>"


class Vocab:
    def __init__(self, words: list[str]):
        self.tokens = [NULL_TOKEN, UNK_TOKEN] + list(dict.fromkeys(words))
        self.index = {w: i for i, w in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def null_id(self) -> int:
        return self.index[NULL_TOKEN]

    @property
    def unk_id(self) -> int:
        return self.index[UNK_TOKEN]

    def encode(self, caption: str | None) -> np.ndarray:
        """Token ids for a caption; NULL_CAPTION becomes the single null token."""
        if caption is NULL_CAPTION:
            return np.array([self.null_id], dtype=np.int64)
        words = tokenize(caption)
        if not words:
            raise ConditioningError("caption has no tokens")
        return np.array([self.index.get(w, self.unk_id) for w in words], dtype=np.int64)


def tokenize(caption: str) -> list[str]:
    return caption.lower().split()


def grammar_vocab() -> Vocab:
    return Vocab(list(COLORS) + list(SHAPES) + ["moving"] + list(DIRECTIONS))
