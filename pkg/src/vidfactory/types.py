"""Core value types carried between pipeline stages."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatchError, ValidationError

LANDSCAPE = "landscape"
PORTRAIT = "portrait"
ORIENTATIONS = (LANDSCAPE, PORTRAIT)

# Pixel sizes per orientation: chosen so the factor-4 codec output still
# survives two 2x U-Net downsamplings.
FRAME_SIZES = {LANDSCAPE: (48, 80), PORTRAIT: (80, 48)}

AUDIO_SAMPLE_RATE = 16000


@dataclass
class VideoTensor:
    """Clip of frames x height x width x 3 float32 pixels in [0, 1]."""

    frames: np.ndarray
    fps: int = 8
    orientation: str = LANDSCAPE

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float32)
        if self.frames.ndim != 4 or self.frames.shape[-1] != 3:
            raise ShapeMismatchError(
                f"expected frames x h x w x 3, got {self.frames.shape}"
            )
        if self.orientation not in ORIENTATIONS:
            raise ValidationError(
                f"unknown orientation {self.orientation!r}", ["orientation"]
            )
        if self.fps <= 0:
            raise ValidationError("fps must be positive", ["fps"])

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    @property
    def duration(self) -> float:
        return self.n_frames / self.fps


@dataclass
class AudioAsset:
    """Bank row: waveform at 16 kHz plus its caption and class."""

    asset_id: str
    waveform: np.ndarray
    caption: str
    class_id: str
    sample_rate: int = AUDIO_SAMPLE_RATE

    def __post_init__(self):
        self.waveform = np.asarray(self.waveform, dtype=np.float32)

    @property
    def duration(self) -> float:
        return self.waveform.shape[0] / self.sample_rate


@dataclass
class AudioSegment:
    """Half-open slice [start, start + duration) of a bank asset."""

    asset_id: str
    start: float = 0.0
    duration: float = 0.0

    def validate(self, asset_duration: float | None = None, path: str = "audio") -> list[str]:
        bad = []
        if self.start < 0:
            bad.append(f"{path}.start")
        if self.duration <= 0:
            bad.append(f"{path}.duration")
        if asset_duration is not None and self.start + self.duration > asset_duration + 1e-9:
            bad.append(f"{path}.duration")
        return bad


@dataclass
class EmbeddingRecord:
    """Retrieval index row: unit-norm embedding with asset metadata."""

    asset_id: str
    caption: str
    embedding: np.ndarray
    duration: float

    def __post_init__(self):
        self.embedding = np.asarray(self.embedding, dtype=np.float32)
        norm = float(np.linalg.norm(self.embedding))
        if abs(norm - 1.0) > 1e-6:
            raise ValidationError(
                f"embedding for {self.asset_id!r} is not unit-norm (|e|={norm})",
                ["embedding"],
            )
