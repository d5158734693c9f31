"""Noise schedule construction, validation, and forward-noising algebra."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vidfactory.diffusion.schedule import NoiseSchedule, q_sample
from vidfactory.errors import ConfigurationError, DomainError


def test_default_schedule_constants():
    sched = NoiseSchedule()
    assert sched.steps == 1000
    assert sched.beta_start == 1e-4
    assert sched.beta_end == 0.02


def test_index_zero_is_a_clean_sentinel():
    sched = NoiseSchedule()
    assert sched.beta.shape == (1001,)
    assert sched.beta[0] == 0.0
    assert sched.alpha[0] == 1.0
    assert sched.alpha_bar[0] == 1.0


def test_betas_are_the_linear_ramp():
    sched = NoiseSchedule()
    assert sched.beta[1] == pytest.approx(1e-4, abs=0.0)
    assert sched.beta[1000] == pytest.approx(0.02, abs=0.0)
    expected = np.linspace(1e-4, 0.02, 1000)
    np.testing.assert_allclose(sched.beta[1:], expected, rtol=0, atol=1e-15)


def test_alpha_bar_is_cumprod_and_ends_near_zero():
    sched = NoiseSchedule()
    np.testing.assert_allclose(
        sched.alpha_bar, np.cumprod(sched.alpha), rtol=0, atol=0
    )
    assert sched.alpha_bar[-1] < 0.01
    assert np.all(np.diff(sched.alpha_bar[1:]) < 0)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"steps": 0},
        {"steps": -5},
        {"beta_start": 0.0},
        {"beta_start": -1e-4},
        {"beta_end": 1.0},
        {"steps": 10},  # too short: terminal signal level stays too high
    ],
)
def test_invalid_configurations_rejected(kwargs):
    with pytest.raises(ConfigurationError):
        NoiseSchedule(**kwargs)


def test_meta_roundtrip():
    sched = NoiseSchedule(steps=800, beta_start=2e-4, beta_end=0.03)
    again = NoiseSchedule.from_meta(sched.to_meta())
    assert again.steps == sched.steps
    assert again.beta_start == sched.beta_start
    assert again.beta_end == sched.beta_end
    np.testing.assert_array_equal(again.alpha_bar, sched.alpha_bar)


@settings(max_examples=25, deadline=None)
@given(
    steps=st.integers(min_value=500, max_value=2000),
    beta_start=st.floats(min_value=1e-5, max_value=5e-4),
    beta_end=st.floats(min_value=0.02, max_value=0.08),
)
def test_schedule_properties_hold_for_valid_ranges(steps, beta_start, beta_end):
    sched = NoiseSchedule(steps=steps, beta_start=beta_start, beta_end=beta_end)
    assert sched.beta[0] == 0.0
    assert sched.alpha_bar[0] == 1.0
    assert sched.alpha_bar[-1] < 0.01
    assert np.all(sched.alpha_bar > 0)
    assert np.all(np.diff(sched.alpha_bar[1:]) < 0)


def test_q_sample_matches_closed_form():
    sched = NoiseSchedule()
    rng = np.random.default_rng(0)
    x0 = rng.standard_normal((3, 4, 5)).astype(np.float32)
    eps = rng.standard_normal((3, 4, 5)).astype(np.float32)
    t = np.array([1, 500, 1000])
    out = q_sample(x0, t, eps, sched)
    ab = sched.alpha_bar[t].reshape(-1, 1, 1)
    expected = np.sqrt(ab) * x0 + np.sqrt(1.0 - ab) * eps
    np.testing.assert_allclose(out, expected, rtol=0, atol=1e-6)
    assert out.dtype == x0.dtype


def test_q_sample_t_extremes():
    sched = NoiseSchedule()
    x0 = np.ones((1, 2, 2), dtype=np.float64)
    eps = np.full((1, 2, 2), 2.0)
    near_clean = q_sample(x0, np.array([1]), eps, sched)
    assert np.all(np.abs(near_clean - x0) < 0.05)
    near_noise = q_sample(x0, np.array([1000]), eps, sched)
    assert np.all(np.abs(near_noise - eps) < 0.25)


@pytest.mark.parametrize("t", [0, -1, 1001])
def test_q_sample_rejects_out_of_range_t(t):
    sched = NoiseSchedule()
    x0 = np.zeros((1, 2, 2))
    with pytest.raises(DomainError):
        q_sample(x0, np.array([t]), np.zeros_like(x0), sched)


def test_q_sample_rejects_shape_mismatch():
    sched = NoiseSchedule()
    with pytest.raises(DomainError):
        q_sample(np.zeros((2, 2)), np.array([5, 5]), np.zeros((3, 2)), sched)
