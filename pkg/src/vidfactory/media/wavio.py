"""RIFF WAVE writer/reader: PCM 16-bit little-endian, mono, 16 kHz.

Quantization is clamp(rha(s*32767), -32768, 32767) with rha =
round-half-away-from-zero; reading maps q -> clamp(q/32767, -1, 1), so
write-read-write is byte-stable. The 44-byte canonical header is
normative for interoperating writers.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import FormatError, OutOfRangeError
from ..types import AUDIO_SAMPLE_RATE
from .y4m import round_half_away


def wav_bytes(samples: np.ndarray) -> bytes:
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1:
        raise OutOfRangeError(f"expected mono samples, got shape {samples.shape}")
    if samples.size and (samples.min() < -1.0 or samples.max() > 1.0):
        raise OutOfRangeError(
            f"samples outside [-1,1]: min={samples.min()}, max={samples.max()}"
        )
    q = np.clip(round_half_away(samples * 32767.0), -32768, 32767).astype("<i2")
    data = q.tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(data)) + b"WAVE"
    header += b"fmt " + struct.pack(
        "<IHHIIHH",
        16,  # fmt chunk size
        1,  # PCM
        1,  # mono
        AUDIO_SAMPLE_RATE,
        AUDIO_SAMPLE_RATE * 2,  # byte rate
        2,  # block align
        16,  # bits per sample
    )
    header += b"data" + struct.pack("<I", len(data))
    return header + data


def write_wav(samples: np.ndarray, destination) -> bytes:
    data = wav_bytes(samples)
    path = Path(destination)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)
    return data


def read_wav_bytes(raw: bytes) -> np.ndarray:
    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise FormatError("not a RIFF/WAVE stream (bad riff_tag)")
    pos = 12
    fmt = None
    data = None
    while pos + 8 <= len(raw):
        cid = raw[pos : pos + 4]
        (size,) = struct.unpack("<I", raw[pos + 4 : pos + 8])
        body = raw[pos + 8 : pos + 8 + size]
        if cid == b"fmt ":
            fmt = body
        elif cid == b"data":
            data = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    if fmt is None or len(fmt) < 16:
        raise FormatError("missing fmt chunk (fmt_chunk)")
    if data is None:
        raise FormatError("missing data chunk (data_chunk)")
    audio_format, channels, rate, _, _, bits = struct.unpack("<HHIIHH", fmt[:16])
    if audio_format != 1:
        raise FormatError(f"unsupported audio_format={audio_format}, need PCM (1)")
    if channels != 1:
        raise FormatError(f"unsupported channels={channels}, need mono (1)")
    if rate != AUDIO_SAMPLE_RATE:
        raise FormatError(f"unsupported sample_rate={rate}, need {AUDIO_SAMPLE_RATE}")
    if bits != 16:
        raise FormatError(f"unsupported bits_per_sample={bits}, need 16")
    q = np.frombuffer(data, dtype="<i2").astype(np.float64)
    return np.clip(q / 32767.0, -1.0, 1.0).astype(np.float32)


def read_wav(source) -> np.ndarray:
    return read_wav_bytes(Path(source).read_bytes())
