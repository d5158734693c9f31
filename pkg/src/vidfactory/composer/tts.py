"""Deterministic tone-based text-to-speech and voice presets.

Each sounding code point becomes a 60 ms tone whose fundamental is the
voice's base frequency shifted by (codepoint mod 12) semitones, built from
the voice's 3 harmonic weights and shaped by a raised-cosine envelope.
Spaces and punctuation become 30 ms of silence. The mapping covers every
code point, so any UTF-8 text synthesizes without failure.

The backend interface is a plain callable text, voice -> waveform; this
module ships the deterministic synthesizer and a registry where an
external engine could be slotted in.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError
from ..types import AUDIO_SAMPLE_RATE

TONE_SECONDS = 0.060
SILENCE_SECONDS = 0.030
TONE_SAMPLES = int(TONE_SECONDS * AUDIO_SAMPLE_RATE)  # 960
SILENCE_SAMPLES = int(SILENCE_SECONDS * AUDIO_SAMPLE_RATE)  # 480


@dataclass(frozen=True)
class VoicePreset:
    voice_id: str
    base_frequency: float
    harmonics: tuple[float, float, float]
    amplitude: float = 0.3

    def __post_init__(self):
        if self.base_frequency <= 0:
            raise ConfigurationError("base_frequency must be positive")
        if not 0.0 < self.amplitude <= 1.0:
            raise ConfigurationError("amplitude must be in (0, 1]")
        if len(self.harmonics) != 3:
            raise ConfigurationError("exactly 3 harmonic weights required")


VOICES: dict[str, VoicePreset] = {
    "alto": VoicePreset("alto", 220.0, (1.0, 0.5, 0.25)),
    "bass": VoicePreset("bass", 110.0, (1.0, 0.6, 0.3)),
    "soprano": VoicePreset("soprano", 330.0, (1.0, 0.4, 0.2)),
}


def get_voice(voice_id: str) -> VoicePreset:
    preset = VOICES.get(voice_id)
    if preset is None:
        raise ConfigurationError(
            f"unknown voice id {voice_id!r}; available: {sorted(VOICES)}"
        )
    return preset


def list_voices() -> list[VoicePreset]:
    return [VOICES[k] for k in sorted(VOICES)]


@dataclass
class DubbingSpec:
    text: str
    voice_id: str = "alto"
    t_start: float = 0.0
    gain: float = 1.0

    def validate(self, path: str = "dubbing") -> list[str]:
        bad = []
        if self.t_start < 0:
            bad.append(f"{path}.t_start")
        if self.voice_id not in VOICES:
            bad.append(f"{path}.voice_id")
        if self.gain < 0:
            bad.append(f"{path}.gain")
        return bad


def _is_silent(ch: str) -> bool:
    return ch.isspace() or unicodedata.category(ch).startswith("P")


def tone_frequency(ch: str, voice: VoicePreset) -> float:
    return voice.base_frequency * 2.0 ** ((ord(ch) % 12) / 12.0)


def synth_speech(text: str, voice: VoicePreset | str) -> np.ndarray:
    if isinstance(voice, str):
        voice = get_voice(voice)
    segments = []
    t = np.arange(TONE_SAMPLES, dtype=np.float64) / AUDIO_SAMPLE_RATE
    envelope = 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(TONE_SAMPLES) / (TONE_SAMPLES - 1)))
    for ch in text:
        if _is_silent(ch):
            segments.append(np.zeros(SILENCE_SAMPLES, dtype=np.float64))
            continue
        freq = tone_frequency(ch, voice)
        tone = np.zeros(TONE_SAMPLES, dtype=np.float64)
        for k, weight in enumerate(voice.harmonics):
            tone += weight * np.sin(2.0 * np.pi * freq * (k + 1) * t)
        segments.append(voice.amplitude * envelope * tone)
    if not segments:
        return np.zeros(0, dtype=np.float32)
    return np.concatenate(segments).astype(np.float32)


def speech_duration(text: str) -> float:
    """Exact duration in seconds: 60 ms per sounding code point, 30 ms per silent one."""
    silent = sum(1 for ch in text if _is_silent(ch))
    return (len(text) - silent) * TONE_SECONDS + silent * SILENCE_SECONDS
