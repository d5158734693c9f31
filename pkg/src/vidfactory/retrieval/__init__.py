from .encoders import RetrievalModel, build_caption_vocab, init_retrieval_params, pool_audio
from .index import (
    DEFAULT_K,
    AudioIndex,
    RetrievalResult,
    build_index,
    load_index,
    save_index,
    select_segment,
    topk,
)
from .mel import mel_band_edges, mel_features, n_frames_for
from .training import RetrievalReport, contrastive_loss, margin_loss, train_retrieval

__all__ = [
    "RetrievalModel",
    "build_caption_vocab",
    "init_retrieval_params",
    "pool_audio",
    "DEFAULT_K",
    "AudioIndex",
    "RetrievalResult",
    "build_index",
    "load_index",
    "save_index",
    "select_segment",
    "topk",
    "mel_band_edges",
    "mel_features",
    "n_frames_for",
    "RetrievalReport",
    "contrastive_loss",
    "margin_loss",
    "train_retrieval",
]
