"""2x temporal upsampling: midpoint blend plus an optional learned residual.

The refiner is a small encoder-decoder over the stacked frame pair whose
output projection starts at zero, so refined mode equals plain blending
until it is trained. Original frames always pass through bit-unchanged at
even output indices.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .engine.autograd import Tensor, silu
from .engine.functional import conv2d, upsample2x
from .engine.optim import Adam
from .errors import DataError, FormatError, LengthError, ShapeMismatchError, ValidationError
from .params import ParamStore, load_checkpoint, save_checkpoint
from .types import VideoTensor

MODES = ("blend", "refined")

_HIDDEN = 16


def blend_midpoint(f_a: np.ndarray, f_b: np.ndarray) -> np.ndarray:
    f_a = np.asarray(f_a, dtype=np.float32)
    f_b = np.asarray(f_b, dtype=np.float32)
    if f_a.shape != f_b.shape:
        raise ShapeMismatchError(f"frame shapes differ: {f_a.shape} vs {f_b.shape}")
    return np.float32(0.5) * f_a + np.float32(0.5) * f_b


def init_refiner(seed: int = 0) -> ParamStore:
    store = ParamStore()
    rng = np.random.default_rng(seed)

    def conv(name: str, cout: int, cin: int, zero: bool = False):
        fan_in = cin * 9
        w = (
            np.zeros((cout, cin, 3, 3))
            if zero
            else rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(cout, cin, 3, 3))
        )
        store.add(name + ".w", w.astype(np.float32), "refiner")
        store.add(name + ".b", np.zeros(cout, dtype=np.float32), "refiner")

    conv("conv_in", _HIDDEN, 6)
    conv("down", 2 * _HIDDEN, _HIDDEN)
    conv("mid", 2 * _HIDDEN, 2 * _HIDDEN)
    conv("up", _HIDDEN, 2 * _HIDDEN)
    conv("conv_out", 3, _HIDDEN, zero=True)
    return store


def _residual(P: dict[str, Tensor], pair: Tensor) -> Tensor:
    """pair: (N, 6, H, W) stacked endpoint frames -> (N, 3, H, W) residual."""
    h1 = silu(conv2d(pair, P["conv_in.w"], P["conv_in.b"]))
    h2 = silu(conv2d(h1, P["down.w"], P["down.b"], stride=2))
    h2 = silu(conv2d(h2, P["mid.w"], P["mid.b"]))
    u = silu(conv2d(upsample2x(h2), P["up.w"], P["up.b"]))
    return conv2d(u + h1, P["conv_out.w"], P["conv_out.b"])


def _stack_pair(f_a: np.ndarray, f_b: np.ndarray) -> np.ndarray:
    pair = np.concatenate([f_a, f_b], axis=-1)  # (H, W, 6)
    return np.ascontiguousarray(pair.transpose(2, 0, 1), dtype=np.float32)[None]


def refine_midpoint(f_a: np.ndarray, f_b: np.ndarray, params: ParamStore) -> np.ndarray:
    base = blend_midpoint(f_a, f_b)
    if base.shape[0] % 2 or base.shape[1] % 2:
        raise ShapeMismatchError(f"refiner needs even frame dims, got {base.shape[:2]}")
    P = params.tensors()
    res = _residual(P, Tensor(_stack_pair(f_a, f_b))).data[0].transpose(1, 2, 0)
    return np.clip(base + res, 0.0, 1.0).astype(np.float32)


def interpolate_2x(
    video: VideoTensor, mode: str = "blend", params: ParamStore | None = None
) -> VideoTensor:
    if mode not in MODES:
        raise ValidationError(f"unknown interpolation mode {mode!r}", ["mode"])
    if mode == "refined" and params is None:
        raise ValidationError("refined mode needs refiner parameters", ["params"])
    n = video.frames.shape[0]
    if n < 2:
        raise LengthError(f"need at least 2 frames, got {n}")
    out = np.empty((2 * n - 1,) + video.frames.shape[1:], dtype=np.float32)
    out[0::2] = video.frames
    for k in range(n - 1):
        a, b = video.frames[k], video.frames[k + 1]
        out[2 * k + 1] = (
            blend_midpoint(a, b) if mode == "blend" else refine_midpoint(a, b, params)
        )
    return VideoTensor(out, fps=video.fps * 2, orientation=video.orientation)


@dataclass
class RefinerReport:
    steps: int
    losses: list[float]
    wall_time_s: float


def _triples(clips: list[VideoTensor]) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    triples = []
    for clip in clips:
        if clip.frames.shape[0] < 3:
            raise LengthError("refiner training requires clips with at least 3 frames")
        for t in range(clip.frames.shape[0] - 2):
            triples.append((clip.frames[t], clip.frames[t + 1], clip.frames[t + 2]))
    return triples


def baseline_mse(clips: list[VideoTensor]) -> float:
    """Blend-only midpoint error; the floor a trained refiner must beat."""
    errs = [
        float(np.mean((blend_midpoint(a, c) - b) ** 2)) for a, b, c in _triples(clips)
    ]
    return float(np.mean(errs))


def refined_mse(clips: list[VideoTensor], params: ParamStore) -> float:
    errs = [
        float(np.mean((refine_midpoint(a, c, params) - b) ** 2))
        for a, b, c in _triples(clips)
    ]
    return float(np.mean(errs))


def train_refiner(
    clips: list[VideoTensor],
    steps: int = 300,
    learning_rate: float = 2e-3,
    batch_size: int = 8,
    seed: int = 0,
    progress=None,
) -> tuple[ParamStore, RefinerReport]:
    if not clips:
        raise DataError("refiner dataset is empty")
    triples = _triples(clips)
    store = init_refiner(seed)
    rng = np.random.default_rng(seed)
    names = store.names()
    opt = Adam(names, store, lr=learning_rate)

    losses: list[float] = []
    t0 = time.monotonic()
    for step in range(steps):
        picks = rng.integers(0, len(triples), size=batch_size)
        pair = np.concatenate([_stack_pair(triples[i][0], triples[i][2]) for i in picks])
        base = np.stack(
            [blend_midpoint(triples[i][0], triples[i][2]).transpose(2, 0, 1) for i in picks]
        )
        target = np.stack([triples[i][1].transpose(2, 0, 1) for i in picks])
        P = store.tensors(frozenset({"refiner"}))
        pred = _residual(P, Tensor(pair)) + Tensor(base)
        diff = pred - Tensor(target)
        loss = (diff * diff).mean()
        loss.backward()
        opt.step({n: P[n].grad for n in names if P[n].grad is not None})
        losses.append(float(loss.data.reshape(())))
        if progress is not None:
            progress(step + 1, steps, losses[-1])
    return store, RefinerReport(steps, losses, time.monotonic() - t0)


def save_refiner(path, store: ParamStore) -> None:
    save_checkpoint(path, store, {"kind": "refiner"})


def load_refiner(path) -> ParamStore:
    store, meta = load_checkpoint(path)
    if meta.get("kind") != "refiner":
        raise FormatError(f"checkpoint holds {meta.get('kind')!r}, expected 'refiner'")
    return store
