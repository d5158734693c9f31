"""Synthetic audio bank with captioned classes, the retrieval database stand-in.

Each class is a deterministic synthesizer; noise-based classes draw from the
bank RNG so the whole bank is a pure function of its config.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError
from ..types import AUDIO_SAMPLE_RATE, AudioAsset


@dataclass(frozen=True)
class AudioClassSpec:
    class_id: str
    captions: tuple[str, ...]
    synth: str
    params: dict = field(default_factory=dict)


def default_audio_classes() -> list[AudioClassSpec]:
    return [
        AudioClassSpec(
            "low_hum",
            ("a low machine hum", "deep steady hum droning"),
            "hum",
            {"freq": 80.0, "lfo": 0.5},
        ),
        AudioClassSpec(
            "rising_chirp",
            ("rising chirp sweeping upward", "sweep climbing from low to high"),
            "chirp",
            {"f0": 200.0, "f1": 2000.0},
        ),
        AudioClassSpec(
            "falling_chirp",
            ("falling chirp sweeping downward", "sweep dropping from high to low"),
            "chirp",
            {"f0": 2000.0, "f1": 200.0},
        ),
        AudioClassSpec(
            "white_noise",
            ("white noise hiss", "static noisy hiss wash"),
            "noise",
            {},
        ),
        AudioClassSpec(
            "slow_beeps",
            ("slow beeps pulsing", "beeping tone repeating slowly"),
            "beeps",
            {"freq": 1000.0, "rate": 1.0},
        ),
        AudioClassSpec(
            "high_whine",
            ("high whine wavering", "shrill vibrato whistle"),
            "vibrato",
            {"freq": 3000.0, "rate": 5.0, "depth": 20.0},
        ),
        AudioClassSpec(
            "click_train",
            ("clicking ticks repeating", "rapid tick clatter"),
            "clicks",
            {"rate": 8.0, "burst": 0.01},
        ),
        AudioClassSpec(
            "warble",
            ("warbling alternating tones", "two tones wobbling back and forth"),
            "warble",
            {"fa": 400.0, "fb": 600.0, "rate": 2.0},
        ),
    ]


@dataclass
class AudioBankConfig:
    count: int
    classes: list[AudioClassSpec] = field(default_factory=default_audio_classes)
    sample_rate: int = AUDIO_SAMPLE_RATE
    clip_seconds: float = 4.0
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ConfigurationError("count must be >= 1")
        if self.sample_rate != AUDIO_SAMPLE_RATE:
            raise ConfigurationError(f"sample_rate is fixed at {AUDIO_SAMPLE_RATE}")
        if not self.classes:
            raise ConfigurationError("at least one audio class required")


def chirp_phase(t: np.ndarray, f0: float, f1: float, total: float) -> np.ndarray:
    """Phase of the linear sweep; instantaneous frequency is its derivative/2pi."""
    return 2.0 * math.pi * (f0 * t + (f1 - f0) * t * t / (2.0 * total))


def _synthesize(spec: AudioClassSpec, seconds: float, rng: np.random.Generator) -> np.ndarray:
    n = int(round(seconds * AUDIO_SAMPLE_RATE))
    t = np.arange(n, dtype=np.float64) / AUDIO_SAMPLE_RATE
    p = spec.params
    if spec.synth == "hum":
        lfo = 0.75 + 0.25 * np.sin(2 * math.pi * p["lfo"] * t)
        wave = 0.8 * np.sin(2 * math.pi * p["freq"] * t) * lfo
    elif spec.synth == "chirp":
        wave = 0.8 * np.sin(chirp_phase(t, p["f0"], p["f1"], seconds))
    elif spec.synth == "noise":
        wave = rng.uniform(-0.8, 0.8, size=n)
    elif spec.synth == "beeps":
        gate = (np.floor(t * p["rate"] * 2).astype(np.int64) % 2) == 0
        wave = 0.8 * np.sin(2 * math.pi * p["freq"] * t) * gate
    elif spec.synth == "vibrato":
        phase = 2 * math.pi * (
            p["freq"] * t - p["depth"] / (2 * math.pi * p["rate"]) * np.cos(2 * math.pi * p["rate"] * t)
        )
        wave = 0.7 * np.sin(phase)
    elif spec.synth == "clicks":
        period = int(AUDIO_SAMPLE_RATE / p["rate"])
        burst = int(p["burst"] * AUDIO_SAMPLE_RATE)
        wave = np.zeros(n)
        for start in range(0, n, period):
            stop = min(start + burst, n)
            wave[start:stop] = rng.uniform(-0.9, 0.9, size=stop - start)
    elif spec.synth == "warble":
        sel = (np.floor(t * p["rate"] * 2).astype(np.int64) % 2) == 0
        wave = 0.8 * np.where(
            sel,
            np.sin(2 * math.pi * p["fa"] * t),
            np.sin(2 * math.pi * p["fb"] * t),
        )
    else:
        raise ConfigurationError(f"unknown synth kind {spec.synth!r}")
    return np.asarray(wave, dtype=np.float32)


def make_audio_bank(config: AudioBankConfig) -> list[AudioAsset]:
    rng = np.random.default_rng(config.seed)
    by_id = {c.class_id: c for c in config.classes}
    if len(by_id) != len(config.classes):
        raise ConfigurationError("duplicate class ids in bank config")
    assets = []
    for i in range(config.count):
        spec = config.classes[i % len(config.classes)]
        caption = spec.captions[int(rng.integers(len(spec.captions)))]
        wave = _synthesize(spec, config.clip_seconds, rng)
        assets.append(
            AudioAsset(
                asset_id=f"{spec.class_id}-{i:04d}",
                waveform=wave,
                caption=caption,
                class_id=spec.class_id,
            )
        )
    return assets
