"""Log-mel featurizer for 16 kHz mono audio.

Frame 512, hop 256, periodic Hann window, 32 triangular bands on the HTK
mel scale spanning 0-8000 Hz, output log(1 + mel power). Purely functional
and deterministic; every entry is >= 0 because mel power is >= 0.
"""

from __future__ import annotations

import numpy as np

from ..errors import LengthError
from ..types import AUDIO_SAMPLE_RATE

FRAME_LENGTH = 512
HOP_LENGTH = 256
N_BANDS = 32
F_MIN = 0.0
F_MAX = 8000.0


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_band_edges(n_bands: int = N_BANDS) -> np.ndarray:
    """n_bands+2 Hz edge points; band b peaks at edge b+1."""
    mels = np.linspace(hz_to_mel(F_MIN), hz_to_mel(F_MAX), n_bands + 2)
    return mel_to_hz(mels)


def _filterbank(n_bands: int, n_fft: int, sample_rate: int) -> np.ndarray:
    edges = mel_band_edges(n_bands)
    bin_freqs = np.arange(n_fft // 2 + 1, dtype=np.float64) * sample_rate / n_fft
    fb = np.zeros((n_bands, bin_freqs.shape[0]))
    for b in range(n_bands):
        lo, mid, hi = edges[b], edges[b + 1], edges[b + 2]
        up = (bin_freqs - lo) / (mid - lo)
        down = (hi - bin_freqs) / (hi - mid)
        fb[b] = np.maximum(0.0, np.minimum(up, down))
    return fb


_FB = _filterbank(N_BANDS, FRAME_LENGTH, AUDIO_SAMPLE_RATE)
# Periodic Hann: denominator N, not N-1, so the window tiles seamlessly.
_WINDOW = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(FRAME_LENGTH) / FRAME_LENGTH)


def n_frames_for(samples: int) -> int:
    return (samples - FRAME_LENGTH) // HOP_LENGTH + 1


def mel_features(waveform: np.ndarray) -> np.ndarray:
    wave = np.asarray(waveform, dtype=np.float64)
    if wave.ndim != 1:
        raise LengthError(f"expected mono waveform, got shape {wave.shape}")
    if wave.shape[0] < FRAME_LENGTH:
        raise LengthError(
            f"waveform has {wave.shape[0]} samples; need at least {FRAME_LENGTH}"
        )
    frames = n_frames_for(wave.shape[0])
    idx = np.arange(FRAME_LENGTH)[None, :] + HOP_LENGTH * np.arange(frames)[:, None]
    windowed = wave[idx] * _WINDOW[None, :]
    power = np.abs(np.fft.rfft(windowed, axis=1)) ** 2
    mel_power = power @ _FB.T
    return np.log1p(mel_power).astype(np.float32)
