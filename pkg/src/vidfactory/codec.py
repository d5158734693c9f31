"""Exactly invertible pixel <-> latent mapping.

Space-to-depth with factor 4 replaces a learned autoencoder: pixel (r, c, ch)
lands in latent cell (r//4, c//4) at channel ch*16 + (r%4)*4 + (c%4), values
unchanged. Being a permutation, the roundtrip is bit-exact and the map is
linear, which downstream tests rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatchError
from .types import ORIENTATIONS, VideoTensor

FACTOR = 4
LATENT_CHANNELS = 3 * FACTOR * FACTOR  # 48


@dataclass
class LatentTensor:
    """frames x (h/4) x (w/4) x 48 carrier for the diffusion model."""

    data: np.ndarray
    fps: int = 8
    orientation: str = "landscape"

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.ndim != 4 or self.data.shape[-1] != LATENT_CHANNELS:
            raise ShapeMismatchError(
                f"expected frames x h x w x {LATENT_CHANNELS}, got {self.data.shape}"
            )
        if self.orientation not in ORIENTATIONS:
            raise ShapeMismatchError(f"unknown orientation {self.orientation!r}")

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]


def encode(video: VideoTensor) -> LatentTensor:
    f, h, w, ch = video.frames.shape
    if h % FACTOR or w % FACTOR:
        raise ShapeMismatchError(f"frame dims {h}x{w} not divisible by {FACTOR}")
    x = video.frames.reshape(f, h // FACTOR, FACTOR, w // FACTOR, FACTOR, ch)
    x = x.transpose(0, 1, 3, 5, 2, 4)  # (f, h/4, w/4, ch, r%4, c%4)
    x = x.reshape(f, h // FACTOR, w // FACTOR, LATENT_CHANNELS)
    return LatentTensor(np.ascontiguousarray(x), fps=video.fps, orientation=video.orientation)


def decode(latent: LatentTensor, clamp: bool = False) -> VideoTensor:
    f, hl, wl, cl = latent.data.shape
    if cl != LATENT_CHANNELS:
        raise ShapeMismatchError(f"expected {LATENT_CHANNELS} channels, got {cl}")
    x = latent.data.reshape(f, hl, wl, 3, FACTOR, FACTOR)
    x = x.transpose(0, 1, 4, 2, 5, 3)  # (f, h/4, r%4, w/4, c%4, ch)
    x = x.reshape(f, hl * FACTOR, wl * FACTOR, 3)
    if clamp:
        x = np.clip(x, 0.0, 1.0)
    return VideoTensor(
        np.ascontiguousarray(x, dtype=np.float32), fps=latent.fps, orientation=latent.orientation
    )
