"""Shared fixtures: tiny models, toy datasets, and a seeded service home."""

from __future__ import annotations

import pytest

from vidfactory.diffusion import (
    DenoiserModel,
    NoiseSchedule,
    StageSpec,
    UNetConfig,
    grammar_vocab,
    prepare_datasets,
    train_stage,
)
from vidfactory.retrieval import build_index, train_retrieval
from vidfactory.service import ServiceContext
from vidfactory.toygen.audio import AudioBankConfig, default_audio_classes, make_audio_bank
from vidfactory.toygen.video import ToyVideoConfig, make_video_dataset

# Small enough for per-test forwards, big enough to exercise every block.
TINY_CFG = UNetConfig(base_channels=8, text_embed_dim=16)


def build_tiny_datasets(frames: int = 4):
    landscape = make_video_dataset(
        ToyVideoConfig(count=8, frames_per_clip=frames, orientation="landscape", seed=0)
    )
    portrait = make_video_dataset(
        ToyVideoConfig(count=4, frames_per_clip=frames, orientation="portrait", seed=1)
    )
    return prepare_datasets(landscape, portrait, grammar_vocab())


@pytest.fixture()
def tiny_model() -> DenoiserModel:
    return DenoiserModel.build(TINY_CFG, seed=0)


@pytest.fixture(scope="session")
def tiny_datasets():
    return build_tiny_datasets()


@pytest.fixture(scope="session")
def audio_bank16():
    return make_audio_bank(
        AudioBankConfig(count=16, classes=default_audio_classes(), seed=0)
    )


@pytest.fixture(scope="session")
def trained_retrieval():
    """Full toy-bank retrieval training run, shared by unit and acceptance tests."""
    bank = make_audio_bank(
        AudioBankConfig(count=48, classes=default_audio_classes(), seed=0)
    )
    model, report = train_retrieval(bank, epochs=50, seed=0)
    index = build_index(bank, model)
    return bank, model, report, index


@pytest.fixture(scope="session")
def seeded_home(tmp_path_factory):
    """Service home with audio bank, retrieval index, and a toy denoiser checkpoint."""
    home = tmp_path_factory.mktemp("svc-home")
    ctx = ServiceContext(home=home, ckpt=None)
    try:
        ctx.build_assets(count=16, seed=0, epochs=12)
    finally:
        ctx.close()
    ckpt = home / "toy.ckpt"
    model = DenoiserModel.build(TINY_CFG, seed=0)
    sched = NoiseSchedule()
    train_stage(model, build_tiny_datasets(), StageSpec("image_pretrain", steps=3, seed=0), sched)
    model.save(ckpt, sched)
    return home, ckpt
