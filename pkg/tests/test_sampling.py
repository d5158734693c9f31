"""DDIM sampler: sub-schedule, guidance combination, determinism, gating."""

from __future__ import annotations

import numpy as np
import pytest

from vidfactory.diffusion import (
    DenoiserModel,
    NoiseSchedule,
    SamplerConfig,
    StageSpec,
    UNetConfig,
    cfg_combine,
    ddim_taus,
    sample_ddim,
    train_stage,
)
from vidfactory.errors import ConfigurationError, SequencingError, ShapeMismatchError

TINY_CFG = UNetConfig(base_channels=8, text_embed_dim=16)


@pytest.fixture(scope="module")
def sampler_model(tiny_datasets):
    model = DenoiserModel.build(TINY_CFG, seed=0)
    sched = NoiseSchedule()
    train_stage(model, tiny_datasets, StageSpec("image_pretrain", steps=2, seed=0), sched)
    return model, sched


def test_taus_formula_and_terminal_step():
    assert ddim_taus(1000, 50) == [(i + 1) * 1000 // 50 for i in range(50)]
    assert ddim_taus(1000, 50)[-1] == 1000
    assert ddim_taus(1000, 1000) == list(range(1, 1001))
    taus = ddim_taus(1000, 7)  # non-dividing count still ends at T
    assert taus[-1] == 1000
    assert all(b > a for a, b in zip(taus, taus[1:]))
    assert all(1 <= t <= 1000 for t in taus)


def test_taus_rejects_oversampling():
    with pytest.raises(ConfigurationError):
        ddim_taus(100, 101)


def test_cfg_combine_formula():
    rng = np.random.default_rng(0)
    eu = rng.standard_normal((2, 3)).astype(np.float32)
    ec = rng.standard_normal((2, 3)).astype(np.float32)
    np.testing.assert_array_equal(cfg_combine(eu, ec, 0.0), eu)
    np.testing.assert_allclose(cfg_combine(eu, ec, 1.0), ec, rtol=1e-6)
    s = 3.5
    np.testing.assert_allclose(
        cfg_combine(eu, ec, s), eu + s * (ec - eu), rtol=0, atol=1e-6
    )
    with pytest.raises(ShapeMismatchError):
        cfg_combine(eu, ec[:1], 1.0)


def test_sampling_requires_a_pretrained_model():
    fresh = DenoiserModel.build(TINY_CFG, seed=0)
    with pytest.raises(SequencingError):
        sample_ddim(fresh, "red square moving left", SamplerConfig(ddim_steps=2))


def test_sample_shapes_follow_config(sampler_model):
    model, sched = sampler_model
    cfg = SamplerConfig(ddim_steps=2, n_frames=3, orientation="portrait", seed=0, fps=12)
    lat = sample_ddim(model, "red square moving left", cfg, sched)
    assert lat.data.shape == (3, 20, 12, 48)
    assert lat.orientation == "portrait"
    assert lat.fps == 12

    cfg_land = SamplerConfig(ddim_steps=2, n_frames=2, orientation="landscape", seed=0)
    lat_land = sample_ddim(model, None, cfg_land, sched)
    assert lat_land.data.shape == (2, 12, 20, 48)


def test_sampling_is_seed_deterministic(sampler_model):
    model, sched = sampler_model
    cfg = SamplerConfig(ddim_steps=3, n_frames=2, seed=9)
    a = sample_ddim(model, "red square moving left", cfg, sched)
    b = sample_ddim(model, "red square moving left", cfg, sched)
    np.testing.assert_array_equal(a.data, b.data)
    c = sample_ddim(model, "red square moving left",
                    SamplerConfig(ddim_steps=3, n_frames=2, seed=10), sched)
    assert not np.array_equal(a.data, c.data)


def test_null_prompt_collapses_guidance(sampler_model):
    # With no prompt both guidance branches see the null caption, so the
    # scale cannot matter.
    model, sched = sampler_model
    base = SamplerConfig(ddim_steps=2, n_frames=1, seed=4, guidance_scale=0.0)
    high = SamplerConfig(ddim_steps=2, n_frames=1, seed=4, guidance_scale=7.0)
    a = sample_ddim(model, None, base, sched)
    b = sample_ddim(model, None, high, sched)
    np.testing.assert_array_equal(a.data, b.data)


def test_prompt_changes_samples(sampler_model):
    model, sched = sampler_model
    cfg = SamplerConfig(ddim_steps=3, n_frames=1, seed=4, guidance_scale=3.0)
    a = sample_ddim(model, "red square moving left", cfg, sched)
    b = sample_ddim(model, "blue circle moving up", cfg, sched)
    assert not np.array_equal(a.data, b.data)


def test_progress_reports_monotone_completion(sampler_model):
    model, sched = sampler_model
    seen = []
    sample_ddim(
        model,
        None,
        SamplerConfig(ddim_steps=4, n_frames=1, seed=0),
        sched,
        progress=lambda done, total: seen.append((done, total)),
    )
    assert seen == [(1, 4), (2, 4), (3, 4), (4, 4)]


def test_invalid_sampler_config_rejected(sampler_model):
    model, sched = sampler_model
    with pytest.raises(Exception):
        sample_ddim(model, None, SamplerConfig(ddim_steps=0), sched)
    with pytest.raises(Exception):
        sample_ddim(model, None, SamplerConfig(n_frames=0, ddim_steps=2), sched)
    with pytest.raises(Exception):
        sample_ddim(
            model, None, SamplerConfig(ddim_steps=2, orientation="diagonal"), sched
        )
