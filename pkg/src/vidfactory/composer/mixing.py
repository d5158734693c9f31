"""Background/dubbing mixdown with speech ducking.

The background gain envelope is 1.0 away from speech and 10^(duck_db/20)
under it, with linear ramps of ramp_ms on each side of every speech
region. Overlapping speech regions share one duck (gains do not compound):
the envelope is driven by the distance to the nearest active sample over
the union of regions.
"""

from __future__ import annotations

import numpy as np

from ..errors import OutOfRangeError
from ..types import AUDIO_SAMPLE_RATE


def _distance_to_active(active: np.ndarray) -> np.ndarray:
    """Per-sample distance (in samples) to the nearest True; inf when none."""
    idx = np.arange(active.shape[0], dtype=np.float64)
    prev = np.maximum.accumulate(np.where(active, idx, -np.inf))
    nxt = np.minimum.accumulate(np.where(active, idx, np.inf)[::-1])[::-1]
    return np.minimum(idx - prev, nxt - idx)


def duck_envelope(
    active: np.ndarray, duck_db: float, ramp_ms: float
) -> np.ndarray:
    """Gain per sample in [min_gain, 1] for the union speech-activity mask."""
    min_gain = 10.0 ** (duck_db / 20.0)
    if not active.any() or min_gain >= 1.0:
        return np.ones(active.shape[0], dtype=np.float64)
    ramp = max(int(round(ramp_ms * AUDIO_SAMPLE_RATE / 1000.0)), 1)
    dist = _distance_to_active(active)
    coverage = np.clip(1.0 - dist / ramp, 0.0, 1.0)
    return 1.0 - (1.0 - min_gain) * coverage


def mix_audio(
    background: np.ndarray,
    dubbings: list[tuple[np.ndarray, float, float]],
    duck_db: float = -12.0,
    ramp_ms: float = 50.0,
    total_len: int | None = None,
) -> np.ndarray:
    """dubbings: (waveform, t_start seconds, linear gain) triples.

    The background is zero-padded or truncated to total_len. With no
    dubbings the in-range background passes through bit-identically.
    """
    background = np.asarray(background, dtype=np.float32)
    if total_len is None:
        total_len = background.shape[0]
    if background.shape[0] >= total_len:
        out = background[:total_len].astype(np.float32, copy=True)
    else:
        out = np.zeros(total_len, dtype=np.float32)
        out[: background.shape[0]] = background

    if dubbings:
        active = np.zeros(total_len, dtype=bool)
        placed = []
        for wave, t_start, gain in dubbings:
            wave = np.asarray(wave, dtype=np.float32)
            i0 = int(t_start * AUDIO_SAMPLE_RATE)
            i1 = i0 + wave.shape[0]
            if t_start < 0 or i1 > total_len:
                raise OutOfRangeError(
                    f"dubbing [{i0}, {i1}) does not fit in {total_len} samples"
                )
            active[i0:i1] = True
            placed.append((wave, i0, i1, gain))
        out = (out * duck_envelope(active, duck_db, ramp_ms)).astype(np.float32)
        for wave, i0, i1, gain in placed:
            out[i0:i1] += np.float32(gain) * wave
    return np.clip(out, -1.0, 1.0)
