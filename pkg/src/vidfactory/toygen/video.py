"""Procedural moving-shape clips with grammar captions.

The corpus stands in for a real video dataset: solid shapes on a mid-gray
background, no anti-aliasing, so centroid tracking and exact-pixel tests are
robust. Captions come from the closed grammar
"<color> <shape> moving <direction>".
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, GeometryError
from ..types import FRAME_SIZES, LANDSCAPE, ORIENTATIONS, VideoTensor

COLORS = {
    "red": (1.0, 0.0, 0.0),
    "green": (0.0, 1.0, 0.0),
    "blue": (0.0, 0.0, 1.0),
    "yellow": (1.0, 1.0, 0.0),
}
SHAPES = ("square", "circle", "triangle")
# (drow, dcol) per frame step; row axis grows downward.
DIRECTIONS = {
    "left": (0, -1),
    "right": (0, 1),
    "up": (-1, 0),
    "down": (1, 0),
}
BACKGROUND = 0.5

SIZES = (6, 8, 10)
SPEEDS = (2, 3)


@dataclass
class ShapeState:
    shape: str
    color: str
    direction: str
    center: tuple[int, int]
    size: int
    speed: int


@dataclass
class ToyVideoConfig:
    count: int
    frames_per_clip: int = 8
    orientation: str = LANDSCAPE
    fps: int = 8
    seed: int = 0
    height: int | None = None
    width: int | None = None

    def __post_init__(self):
        if self.orientation not in ORIENTATIONS:
            raise ConfigurationError(f"unknown orientation {self.orientation!r}")
        h0, w0 = FRAME_SIZES[self.orientation]
        self.height = h0 if self.height is None else self.height
        self.width = w0 if self.width is None else self.width
        if self.count < 1:
            raise ConfigurationError("count must be >= 1")
        if self.frames_per_clip < 1:
            raise ConfigurationError("frames_per_clip must be >= 1")
        for label, v in (("height", self.height), ("width", self.width)):
            if v % 4 != 0:
                raise ConfigurationError(
                    f"{label}={v} not divisible by 4 (codec factor)"
                )
            if (v // 4) % 4 != 0:
                raise ConfigurationError(
                    f"{label}={v}: {label}/4={v // 4} not divisible by 4 "
                    "(two U-Net downsamplings)"
                )


def _shape_mask(state: ShapeState, height: int, width: int) -> np.ndarray:
    r0, c0 = state.center
    rows = np.arange(height)[:, None] - r0
    cols = np.arange(width)[None, :] - c0
    s = state.size
    if state.shape == "square":
        return (np.abs(rows) <= s) & (np.abs(cols) <= s)
    if state.shape == "circle":
        return rows * rows + cols * cols <= s * s
    if state.shape == "triangle":
        # Apex at the top, base at the bottom edge of the bounding box.
        return (np.abs(rows) <= s) & (np.abs(cols) * 2 <= rows + s)
    raise ConfigurationError(f"unknown shape {state.shape!r}")


def render_shape_frame(state: ShapeState, height: int, width: int) -> np.ndarray:
    r0, c0 = state.center
    s = state.size
    if r0 - s < 0 or r0 + s > height - 1 or c0 - s < 0 or c0 + s > width - 1:
        raise GeometryError(
            f"shape at {state.center} size {s} leaves the {height}x{width} frame"
        )
    if state.color not in COLORS:
        raise ConfigurationError(f"unknown color {state.color!r}")
    frame = np.full((height, width, 3), BACKGROUND, dtype=np.float32)
    mask = _shape_mask(state, height, width)
    frame[mask] = np.asarray(COLORS[state.color], dtype=np.float32)
    return frame


def caption_for(state: ShapeState) -> str:
    return f"{state.color} {state.shape} moving {state.direction}"


def _spawn(rng: np.random.Generator, cfg: ToyVideoConfig) -> ShapeState:
    shape = SHAPES[rng.integers(len(SHAPES))]
    color = list(COLORS)[rng.integers(len(COLORS))]
    direction = list(DIRECTIONS)[rng.integers(len(DIRECTIONS))]
    size = int(SIZES[rng.integers(len(SIZES))])
    speed = int(SPEEDS[rng.integers(len(SPEEDS))])
    dr, dc = DIRECTIONS[direction]
    disp = speed * (cfg.frames_per_clip - 1)
    r_lo = size + max(0, -dr * disp)
    r_hi = cfg.height - 1 - size - max(0, dr * disp)
    c_lo = size + max(0, -dc * disp)
    c_hi = cfg.width - 1 - size - max(0, dc * disp)
    if r_hi < r_lo or c_hi < c_lo:
        raise GeometryError(
            f"no spawn keeps a size-{size} shape inside {cfg.height}x{cfg.width} "
            f"over {disp}px of motion"
        )
    center = (int(rng.integers(r_lo, r_hi + 1)), int(rng.integers(c_lo, c_hi + 1)))
    return ShapeState(shape, color, direction, center, size, speed)


def render_clip(state: ShapeState, cfg: ToyVideoConfig) -> VideoTensor:
    dr, dc = DIRECTIONS[state.direction]
    frames = np.empty((cfg.frames_per_clip, cfg.height, cfg.width, 3), dtype=np.float32)
    for f in range(cfg.frames_per_clip):
        center = (
            state.center[0] + dr * state.speed * f,
            state.center[1] + dc * state.speed * f,
        )
        frames[f] = render_shape_frame(
            ShapeState(state.shape, state.color, state.direction, center, state.size, state.speed),
            cfg.height,
            cfg.width,
        )
    return VideoTensor(frames, fps=cfg.fps, orientation=cfg.orientation)


def make_video_dataset(config: ToyVideoConfig) -> list[tuple[VideoTensor, str]]:
    rng = np.random.default_rng(config.seed)
    out = []
    for _ in range(config.count):
        state = _spawn(rng, config)
        out.append((render_clip(state, config), caption_for(state)))
    return out


# -- motion ground truth -------------------------------------------------------

MASK_THRESHOLD = 0.15


def centroid(frame: np.ndarray) -> tuple[float, float] | None:
    """Weighted centroid of non-background pixels; None for a blank frame."""
    mask = np.abs(frame - BACKGROUND).max(axis=-1) > MASK_THRESHOLD
    total = mask.sum()
    if total == 0:
        return None
    rows, cols = np.nonzero(mask)
    return float(rows.mean()), float(cols.mean())


def centroid_displacement(video: VideoTensor) -> tuple[float, float] | None:
    first = centroid(video.frames[0])
    last = centroid(video.frames[-1])
    if first is None or last is None:
        return None
    return last[0] - first[0], last[1] - first[1]


def direction_agreement(video: VideoTensor, direction: str) -> bool:
    """True when centroid displacement projects strictly positive on the axis."""
    disp = centroid_displacement(video)
    if disp is None:
        return False
    dr, dc = DIRECTIONS[direction]
    return disp[0] * dr + disp[1] * dc > 0.0
