"""Deterministic DDIM sampler with classifier-free guidance.

eta is fixed at 0, so a sample is a pure function of (params, prompt,
seed, config). The sub-schedule tau_i = (i+1)*T//S touches t=T exactly and
the final step lands on alpha_bar=1, returning the clean x0 estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..codec import LATENT_CHANNELS, LatentTensor
from ..errors import ConfigurationError, SequencingError, ShapeMismatchError
from ..types import FRAME_SIZES, ORIENTATIONS, PORTRAIT
from .schedule import NoiseSchedule
from .unet import DenoiserModel


@dataclass
class SamplerConfig:
    ddim_steps: int = 50
    guidance_scale: float = 3.0
    eta: float = 0.0
    n_frames: int = 8
    orientation: str = PORTRAIT
    seed: int = 0
    fps: int = 8

    def __post_init__(self):
        if self.eta != 0.0:
            raise ConfigurationError("only eta=0 (deterministic DDIM) is supported")
        if self.ddim_steps < 1:
            raise ConfigurationError("ddim_steps must be >= 1")
        if self.guidance_scale < 0:
            raise ConfigurationError("guidance_scale must be >= 0")
        if self.n_frames < 1:
            raise ConfigurationError("n_frames must be >= 1")
        if self.orientation not in ORIENTATIONS:
            raise ConfigurationError(f"unknown orientation {self.orientation!r}")


def cfg_combine(eps_uncond: np.ndarray, eps_cond: np.ndarray, s: float) -> np.ndarray:
    if eps_uncond.shape != eps_cond.shape:
        raise ShapeMismatchError(
            f"branch shapes differ: {eps_uncond.shape} vs {eps_cond.shape}"
        )
    s = np.asarray(s, dtype=eps_uncond.dtype)
    return eps_uncond + s * (eps_cond - eps_uncond)


def ddim_taus(total_steps: int, ddim_steps: int) -> list[int]:
    """Ascending sub-schedule; tau_{S-1} = T so sampling starts from pure noise."""
    if ddim_steps > total_steps:
        raise ConfigurationError(
            f"ddim_steps {ddim_steps} exceeds schedule length {total_steps}"
        )
    return [(i + 1) * total_steps // ddim_steps for i in range(ddim_steps)]


def sample_ddim(
    model: DenoiserModel,
    prompt: str | None,
    cfg: SamplerConfig,
    sched: NoiseSchedule | None = None,
    progress=None,
) -> LatentTensor:
    sched = sched or NoiseSchedule()
    if "image_pretrain" not in model.stage_history:
        raise SequencingError("sampling requires a model past image_pretrain")
    ids_c = model.vocab.encode(prompt)  # conditioning error propagates
    ids_u = model.vocab.encode(None)
    taus = ddim_taus(sched.steps, cfg.ddim_steps)

    frame_h, frame_w = FRAME_SIZES[cfg.orientation]
    h, w = frame_h // 4, frame_w // 4
    rng = np.random.default_rng(cfg.seed)
    x = rng.standard_normal((1, cfg.n_frames, LATENT_CHANNELS, h, w)).astype(np.float32)

    for i in range(len(taus) - 1, -1, -1):
        t = taus[i]
        t_prev = taus[i - 1] if i > 0 else 0
        eps_u = model.eps_video(x, np.array([t]), [ids_u])
        eps_c = model.eps_video(x, np.array([t]), [ids_c])
        eps = cfg_combine(eps_u, eps_c, cfg.guidance_scale)
        ab_t = np.float32(sched.alpha_bar[t])
        ab_p = np.float32(sched.alpha_bar[t_prev])
        x0 = (x - np.sqrt(np.float32(1.0) - ab_t) * eps) / np.sqrt(ab_t)
        x0 = np.clip(x0, -1.0, 1.0)
        x = np.sqrt(ab_p) * x0 + np.sqrt(np.float32(1.0) - ab_p) * eps
        if progress is not None:
            progress(len(taus) - i, len(taus))

    data = ((x[0] + 1.0) * 0.5).transpose(0, 2, 3, 1)
    return LatentTensor(
        np.ascontiguousarray(data, dtype=np.float32),
        fps=cfg.fps,
        orientation=cfg.orientation,
    )
