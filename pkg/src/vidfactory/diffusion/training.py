"""Staged trainer: freeze/finetune curriculum over the denoiser.

Four stages run in a fixed order, each unlocking exactly one parameter
group while everything else stays bit-identical:

  image_pretrain   backbone          landscape frames, image mode
  spatial_adapt    spatial_adapter   landscape frames, image mode
  temporal         temporal          landscape clips, video mode
  vertical_adapt   spatial_adapter   portrait clips, video mode

The freeze contract holds by construction: the optimizer is built over the
trainable group's parameter names only and updates arrays in place.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .. import codec
from ..engine.autograd import Tensor
from ..engine.optim import Adam
from ..errors import DataError, SequencingError, ValidationError
from ..types import VideoTensor
from .schedule import NoiseSchedule, q_sample
from .text import Vocab
from .unet import DenoiserModel, UNetConfig

STAGE_ORDER = ("image_pretrain", "spatial_adapt", "temporal", "vertical_adapt")

STAGE_GROUPS = {
    "image_pretrain": frozenset({"backbone"}),
    "spatial_adapt": frozenset({"spatial_adapter"}),
    "temporal": frozenset({"temporal"}),
    "vertical_adapt": frozenset({"spatial_adapter"}),
}

STAGE_DATASETS = {
    "image_pretrain": "landscape_images",
    "spatial_adapt": "landscape_images",
    "temporal": "landscape_videos",
    "vertical_adapt": "portrait_videos",
}

DATASET_SELECTORS = ("landscape_images", "landscape_videos", "portrait_videos")

# image_pretrain trains the plain backbone; every later stage runs the full
# residual stack so finetuned blocks see their real surroundings.
STAGE_ADAPTERS = {
    "image_pretrain": False,
    "spatial_adapt": True,
    "temporal": True,
    "vertical_adapt": True,
}

VIDEO_STAGES = frozenset({"temporal", "vertical_adapt"})

CAPTION_DROP_P = 0.1

# Linear learning-rate warmup; raw early Adam steps destabilize the fresh
# backbone at the learning rates the short stage budgets need.
WARMUP_STEPS = 100

# Global-norm gradient clip; without it a single noisy batch can tip the
# run into a dead all-zero prediction it never recovers from.
CLIP_NORM = 1.0


def _clip_grads(grads: dict[str, np.ndarray], max_norm: float) -> dict[str, np.ndarray]:
    total = 0.0
    for g in grads.values():
        total += float(np.sum(g.astype(np.float64) ** 2))
    norm = total ** 0.5
    if norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return grads


@dataclass
class StageSpec:
    stage: str
    steps: int
    learning_rate: float = 1e-3
    batch_size: int = 8
    seed: int = 0
    dataset: str | None = None
    trainable_groups: frozenset[str] | None = None

    def __post_init__(self):
        if self.stage not in STAGE_ORDER:
            raise ValidationError(f"unknown stage {self.stage!r}", ["stage"])
        required = STAGE_GROUPS[self.stage]
        if self.trainable_groups is None:
            self.trainable_groups = required
        elif frozenset(self.trainable_groups) != required:
            raise ValidationError(
                f"stage {self.stage!r} trains exactly {sorted(required)}, "
                f"got {sorted(self.trainable_groups)}",
                ["trainable_groups"],
            )
        if self.dataset is None:
            self.dataset = STAGE_DATASETS[self.stage]
        elif self.dataset not in DATASET_SELECTORS:
            raise ValidationError(f"unknown dataset selector {self.dataset!r}", ["dataset"])
        if self.steps < 1:
            raise ValidationError("steps must be >= 1", ["steps"])
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive", ["learning_rate"])
        if self.batch_size < 1:
            raise ValidationError("batch_size must be >= 1", ["batch_size"])


@dataclass
class TrainReport:
    stage: str
    steps: int
    losses: list[float]
    wall_time_s: float
    trainable_parameters: int


@dataclass
class LatentClip:
    """Channel-first latent clip in the model's [-1, 1] range."""

    latents: np.ndarray  # (F, C, h, w) float32
    caption: str
    ids: np.ndarray


def encode_clip(video: VideoTensor, caption: str, vocab: Vocab) -> LatentClip:
    lat = codec.encode(video).data  # (F, h, w, C) in [0, 1]
    lat = np.ascontiguousarray(lat.transpose(0, 3, 1, 2), dtype=np.float32)
    return LatentClip(lat * 2.0 - 1.0, caption, vocab.encode(caption))


def prepare_datasets(
    landscape: list[tuple[VideoTensor, str]],
    portrait: list[tuple[VideoTensor, str]],
    vocab: Vocab,
) -> dict[str, list[LatentClip]]:
    land = [encode_clip(v, c, vocab) for v, c in landscape]
    port = [encode_clip(v, c, vocab) for v, c in portrait]
    return {
        "landscape_images": land,  # image stages index individual frames
        "landscape_videos": land,
        "portrait_videos": port,
    }


def apply_caption_dropout(
    ids_per_item: list[np.ndarray],
    null_ids: np.ndarray,
    rng: np.random.Generator,
    p: float = CAPTION_DROP_P,
) -> list[np.ndarray]:
    """Independently replace each caption with the NULL token with probability p."""
    draws = rng.random(len(ids_per_item))
    return [null_ids if d < p else ids for d, ids in zip(draws, ids_per_item)]


def _require_order(history: list[str], stage: str) -> None:
    needed = STAGE_ORDER[: STAGE_ORDER.index(stage)]
    missing = [s for s in needed if s not in history]
    if missing:
        raise SequencingError(
            f"stage {stage!r} requires completed stages {list(needed)}; missing {missing}"
        )


def train_stage(
    model: DenoiserModel,
    datasets: dict[str, list[LatentClip]],
    spec: StageSpec,
    sched: NoiseSchedule | None = None,
    progress=None,
) -> TrainReport:
    sched = sched or NoiseSchedule()
    _require_order(model.stage_history, spec.stage)
    clips = datasets.get(spec.dataset) or []
    if not clips:
        raise DataError(f"dataset {spec.dataset!r} is empty")

    rng = np.random.default_rng(spec.seed)
    null_ids = model.vocab.encode(None)
    trainable = spec.trainable_groups
    names = [n for n in model.store.names() if model.store.groups[n] in trainable]
    opt = Adam(names, model.store, lr=spec.learning_rate)
    video_mode = spec.stage in VIDEO_STAGES
    include_adapters = STAGE_ADAPTERS[spec.stage]

    if not video_mode:
        frame_index = [(ci, fi) for ci, c in enumerate(clips) for fi in range(c.latents.shape[0])]

    losses: list[float] = []
    t0 = time.monotonic()
    for step in range(spec.steps):
        if video_mode:
            picks = rng.integers(0, len(clips), size=spec.batch_size)
            x0 = np.stack([clips[i].latents for i in picks])  # (B, F, C, h, w)
            ids = [clips[i].ids for i in picks]
        else:
            picks = rng.integers(0, len(frame_index), size=spec.batch_size)
            x0 = np.stack([clips[frame_index[i][0]].latents[frame_index[i][1]] for i in picks])
            ids = [clips[frame_index[i][0]].ids for i in picks]
        t = rng.integers(1, sched.steps + 1, size=spec.batch_size)
        eps = rng.standard_normal(x0.shape, dtype=np.float32)
        x_t = q_sample(x0, t, eps, sched)
        ids = apply_caption_dropout(ids, null_ids, rng)

        P = model.store.tensors(trainable)
        if video_mode:
            pred = model.forward_video(P, Tensor(x_t), t, ids, include_adapters, True)
        else:
            pred = model.forward_image(P, Tensor(x_t), t, ids, include_adapters)
        diff = pred - Tensor(eps)
        loss = (diff * diff).mean()
        loss.backward()
        opt.lr = spec.learning_rate * min(1.0, (step + 1) / WARMUP_STEPS)
        grads = {n: P[n].grad for n in names if P[n].grad is not None}
        opt.step(_clip_grads(grads, CLIP_NORM))
        losses.append(float(loss.data.reshape(())))
        if progress is not None:
            progress(step + 1, spec.steps, losses[-1])

    model.stage_history.append(spec.stage)
    return TrainReport(
        stage=spec.stage,
        steps=spec.steps,
        losses=losses,
        wall_time_s=time.monotonic() - t0,
        trainable_parameters=int(sum(model.store.arrays[n].size for n in names)),
    )


def check_gradients(
    model: DenoiserModel | None = None,
    n_probes: int = 20,
    fd_step: float = 1e-3,
    seed: int = 0,
) -> float:
    """Analytic vs central-difference gradients of the noise-MSE loss.

    Runs in float64 on a tiny config so the finite-difference step dominates
    roundoff. Returns the max relative error over the probed entries.
    """
    rng = np.random.default_rng(seed)
    if model is None:
        model = DenoiserModel.build(UNetConfig(base_channels=8, text_embed_dim=16), seed=seed)
    store = model.store.astype(np.float64)
    m = DenoiserModel(model.cfg, store, model.vocab)
    groups = frozenset({"backbone", "spatial_adapter", "temporal"})

    x = rng.normal(size=(1, 2, 48, 12, 20))
    t = np.array([rng.integers(1, 1000)])
    ids = [m.vocab.encode("red square moving left")]
    target = rng.normal(size=x.shape)

    def loss_value() -> float:
        out = m.eps_video(x, t, ids)
        return float(np.mean((out - target) ** 2))

    P = store.tensors(groups)
    pred = m.forward_video(P, Tensor(x), t, ids)
    diff = pred - Tensor(target)
    loss = (diff * diff).mean()
    loss.backward()

    names = [n for n in store.names() if store.groups[n] in groups]
    worst = 0.0
    for _ in range(n_probes):
        name = names[rng.integers(0, len(names))]
        flat = store.arrays[name].reshape(-1)
        i = int(rng.integers(0, flat.size))
        orig = flat[i]
        flat[i] = orig + fd_step
        lp = loss_value()
        flat[i] = orig - fd_step
        lm = loss_value()
        flat[i] = orig
        fd = (lp - lm) / (2.0 * fd_step)
        an = 0.0 if P[name].grad is None else float(P[name].grad.reshape(-1)[i])
        rel = abs(fd - an) / max(abs(fd), abs(an), 1e-8)
        worst = max(worst, rel)
    return worst


def check_identity(seed: int = 0) -> dict:
    """Structural invariants of a freshly built model.

    The adapter and temporal stacks carry zero-initialized output
    projections, so before any training they must be exact no-ops:
    toggling adapters cannot change a single bit, and the video forward
    must equal the image forward applied frame by frame. The zero head
    additionally pins the whole untrained prediction at zero.
    """
    cfg = UNetConfig(base_channels=8, text_embed_dim=16)
    model = DenoiserModel.build(cfg, seed=seed)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((1, 2, 48, 12, 20)).astype(np.float32)
    t = np.array([500])
    ids = [model.vocab.encode("red square moving left")]

    video = model.eps_video(x, t, ids)
    frames = x[0]
    per_frame = np.stack(
        [
            model.eps_image(frames[f][None], t, ids, include_adapters=True)[0]
            for f in range(frames.shape[0])
        ]
    )[None]
    flat = x.reshape(-1, *x.shape[2:])
    with_adapters = model.eps_image(flat, np.repeat(t, flat.shape[0]), ids * flat.shape[0], include_adapters=True)
    without = model.eps_image(flat, np.repeat(t, flat.shape[0]), ids * flat.shape[0], include_adapters=False)

    return {
        "adapters_identity": bool(np.array_equal(with_adapters, without)),
        "temporal_identity": bool(np.array_equal(video, per_frame)),
        "zero_baseline": bool(np.all(video == 0.0)),
    }
