from .sampling import SamplerConfig, cfg_combine, ddim_taus, sample_ddim
from .schedule import NoiseSchedule, q_sample
from .text import NULL_CAPTION, Vocab, grammar_vocab, tokenize
from .training import (
    STAGE_ORDER,
    LatentClip,
    StageSpec,
    TrainReport,
    apply_caption_dropout,
    check_gradients,
    encode_clip,
    prepare_datasets,
    train_stage,
)
from .unet import DenoiserModel, UNetConfig, init_params

__all__ = [
    "SamplerConfig",
    "cfg_combine",
    "ddim_taus",
    "sample_ddim",
    "NoiseSchedule",
    "q_sample",
    "NULL_CAPTION",
    "Vocab",
    "grammar_vocab",
    "tokenize",
    "STAGE_ORDER",
    "LatentClip",
    "StageSpec",
    "TrainReport",
    "apply_caption_dropout",
    "check_gradients",
    "encode_clip",
    "prepare_datasets",
    "train_stage",
    "DenoiserModel",
    "UNetConfig",
    "init_params",
]
