"""Denoising U-Net with per-level spatial adapters and temporal layers.

Backbone: 2-level residual U-Net over the 48 latent channels with timestep
embedding and text cross-attention at the lowest resolution. Each level on
each path additionally carries
  * a bottleneck spatial adapter (zero-initialized output projection), and
  * a temporal residual conv block + temporal self-attention block (both
    zero-initialized on their output), active only in video mode.

Zero output projections make every added block an exact no-op at init:
adapters-off and adapters-on forwards are bit-identical, and video-mode
output equals per-frame image-mode output.

Evaluation-order discipline (see engine.functional): the frame axis always
stays a batch axis, so a frame's bits do not depend on how many frames are
batched with it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..codec import LATENT_CHANNELS
from ..engine.autograd import Tensor, concat, embedding, narrow, reshape, silu, transpose
from ..engine.functional import attention, conv1d_frames, conv2d, group_norm, linear, matmul, upsample2x
from ..errors import ConfigurationError, FormatError
from ..params import ParamStore, load_checkpoint, save_checkpoint
from .schedule import NoiseSchedule
from .text import NULL_TOKEN, UNK_TOKEN, Vocab, grammar_vocab

SPATIAL_HEADS = 2


@dataclass
class UNetConfig:
    base_channels: int = 32
    channel_mults: tuple[int, ...] = (1, 2)
    res_blocks_per_level: int = 2
    attn_lowest: bool = True
    text_embed_dim: int = 64
    adapter_bottleneck: int = 16
    temporal_kernel: int = 3
    temporal_heads: int = 2

    def __post_init__(self):
        self.channel_mults = tuple(self.channel_mults)
        if len(self.channel_mults) < 1:
            raise ConfigurationError("at least one U-Net level required")
        if self.base_channels < 1 or any(m < 1 for m in self.channel_mults):
            raise ConfigurationError("channel counts must be positive")
        if self.adapter_bottleneck < 1:
            raise ConfigurationError("adapter_bottleneck must be positive")
        if self.temporal_kernel % 2 != 1:
            raise ConfigurationError("temporal_kernel must be odd")

    @property
    def channels(self) -> list[int]:
        return [self.base_channels * m for m in self.channel_mults]

    @property
    def time_dim(self) -> int:
        return self.base_channels * 4

    def to_meta(self) -> dict:
        return {
            "base_channels": self.base_channels,
            "channel_mults": list(self.channel_mults),
            "res_blocks_per_level": self.res_blocks_per_level,
            "attn_lowest": self.attn_lowest,
            "text_embed_dim": self.text_embed_dim,
            "adapter_bottleneck": self.adapter_bottleneck,
            "temporal_kernel": self.temporal_kernel,
            "temporal_heads": self.temporal_heads,
        }

    @classmethod
    def from_meta(cls, meta: dict) -> "UNetConfig":
        return cls(**{**meta, "channel_mults": tuple(meta["channel_mults"])})


def _gn_groups(c: int) -> int:
    return min(8, c)


class _Init:
    """Deterministic parameter factory; creation order defines the store order."""

    def __init__(self, store: ParamStore, rng: np.random.Generator):
        self.store = store
        self.rng = rng

    def group_for(self, name: str) -> str:
        if name.startswith("adapter."):
            return "spatial_adapter"
        if name.startswith("temporal."):
            return "temporal"
        return "backbone"

    def conv(self, name: str, cout: int, cin: int, kh: int, kw: int, zero: bool = False):
        fan_in = cin * kh * kw
        w = (
            np.zeros((cout, cin, kh, kw))
            if zero
            else self.rng.normal(0.0, math.sqrt(2.0 / fan_in), size=(cout, cin, kh, kw))
        )
        g = self.group_for(name)
        self.store.add(name + ".w", w.astype(np.float32), g)
        self.store.add(name + ".b", np.zeros(cout, dtype=np.float32), g)

    def conv1d(self, name: str, cout: int, cin: int, k: int, zero: bool = False):
        fan_in = cin * k
        w = (
            np.zeros((cout, cin, k))
            if zero
            else self.rng.normal(0.0, math.sqrt(2.0 / fan_in), size=(cout, cin, k))
        )
        g = self.group_for(name)
        self.store.add(name + ".w", w.astype(np.float32), g)
        self.store.add(name + ".b", np.zeros(cout, dtype=np.float32), g)

    def mat(self, name: str, din: int, dout: int, zero: bool = False):
        w = (
            np.zeros((din, dout))
            if zero
            else self.rng.normal(0.0, math.sqrt(1.0 / din), size=(din, dout))
        )
        self.store.add(name, w.astype(np.float32), self.group_for(name))

    def bias(self, name: str, d: int):
        self.store.add(name, np.zeros(d, dtype=np.float32), self.group_for(name))

    def gn(self, name: str, c: int):
        g = self.group_for(name)
        self.store.add(name + ".g", np.ones(c, dtype=np.float32), g)
        self.store.add(name + ".b", np.zeros(c, dtype=np.float32), g)


def _init_resblock(ini: _Init, prefix: str, cin: int, cout: int, time_dim: int):
    # Zero conv2: every residual branch starts as identity, so early blocks
    # see a clean stem stream instead of stacked He-init noise. The branch
    # still wakes immediately (conv2 gets full gradient from step one).
    ini.gn(f"{prefix}.gn1", cin)
    ini.conv(f"{prefix}.conv1", cout, cin, 3, 3)
    ini.mat(f"{prefix}.temb.w", time_dim, cout)
    ini.bias(f"{prefix}.temb.b", cout)
    ini.gn(f"{prefix}.gn2", cout)
    ini.conv(f"{prefix}.conv2", cout, cout, 3, 3, zero=True)
    if cin != cout:
        ini.conv(f"{prefix}.skip", cout, cin, 1, 1)


def _init_self_attn(ini: _Init, prefix: str, c: int):
    ini.gn(f"{prefix}.gn", c)
    ini.mat(f"{prefix}.wq", c, c)
    ini.mat(f"{prefix}.wk", c, c)
    ini.mat(f"{prefix}.wv", c, c)
    ini.mat(f"{prefix}.wo", c, c, zero=True)
    ini.bias(f"{prefix}.bo", c)


def _init_cross_attn(ini: _Init, prefix: str, c: int, text_dim: int):
    ini.gn(f"{prefix}.gn", c)
    ini.mat(f"{prefix}.wq", c, c)
    ini.mat(f"{prefix}.wk", text_dim, c)
    ini.mat(f"{prefix}.wv", text_dim, c)
    # Live output projection, unlike the other residual branches: a zero wo
    # would stall gradients into wq/wk/wv and the text embeddings for the
    # first steps, and the conditioning pathway has the least slack in the
    # short stage budgets.
    ini.mat(f"{prefix}.wo", c, c)
    ini.bias(f"{prefix}.bo", c)


def _init_adapter(ini: _Init, prefix: str, c: int, bottleneck: int):
    ini.conv(f"{prefix}.conv_in", bottleneck, c, 1, 1)
    ini.conv(f"{prefix}.conv_mid", bottleneck, bottleneck, 3, 3)
    ini.conv(f"{prefix}.conv_out", c, bottleneck, 1, 1, zero=True)


def _init_temporal(ini: _Init, prefix: str, c: int, kernel: int):
    ini.gn(f"{prefix}.res.gn", c)
    ini.conv1d(f"{prefix}.res.conv1", c, c, kernel)
    ini.conv1d(f"{prefix}.res.conv2", c, c, kernel, zero=True)
    ini.gn(f"{prefix}.attn.gn", c)
    ini.mat(f"{prefix}.attn.wq", c, c)
    ini.mat(f"{prefix}.attn.wk", c, c)
    ini.mat(f"{prefix}.attn.wv", c, c)
    ini.mat(f"{prefix}.attn.wo", c, c, zero=True)
    ini.bias(f"{prefix}.attn.bo", c)


def init_params(cfg: UNetConfig, vocab: Vocab, seed: int) -> ParamStore:
    store = ParamStore()
    rng = np.random.default_rng(seed)
    ini = _Init(store, rng)
    chans = cfg.channels
    levels = len(chans)
    lowest = levels - 1

    ini.mat("text.table", len(vocab), cfg.text_embed_dim)
    ini.mat("time.w1", cfg.base_channels, cfg.time_dim)
    ini.bias("time.b1", cfg.time_dim)
    ini.mat("time.w2", cfg.time_dim, cfg.time_dim)
    ini.bias("time.b2", cfg.time_dim)
    ini.conv("stem", chans[0], LATENT_CHANNELS, 3, 3)

    for l in range(levels):
        cin = chans[l]
        for r in range(cfg.res_blocks_per_level):
            _init_resblock(ini, f"down{l}.res{r}", cin, chans[l], cfg.time_dim)
            cin = chans[l]
            if cfg.attn_lowest and l == lowest:
                _init_self_attn(ini, f"down{l}.res{r}.sa", chans[l])
                _init_cross_attn(ini, f"down{l}.res{r}.ca", chans[l], cfg.text_embed_dim)
        _init_adapter(ini, f"adapter.down{l}", chans[l], cfg.adapter_bottleneck)
        _init_temporal(ini, f"temporal.down{l}", chans[l], cfg.temporal_kernel)
        if l < levels - 1:
            ini.conv(f"downsample{l}", chans[l + 1], chans[l], 3, 3)

    for l in reversed(range(levels)):
        cin = chans[l] * 2  # concat with the level skip
        for r in range(cfg.res_blocks_per_level):
            _init_resblock(ini, f"up{l}.res{r}", cin, chans[l], cfg.time_dim)
            cin = chans[l]
            if cfg.attn_lowest and l == lowest:
                _init_self_attn(ini, f"up{l}.res{r}.sa", chans[l])
                _init_cross_attn(ini, f"up{l}.res{r}.ca", chans[l], cfg.text_embed_dim)
        _init_adapter(ini, f"adapter.up{l}", chans[l], cfg.adapter_bottleneck)
        _init_temporal(ini, f"temporal.up{l}", chans[l], cfg.temporal_kernel)
        if l > 0:
            ini.conv(f"upsample{l}", chans[l - 1], chans[l], 3, 3)

    # Zero head: the first prediction is exactly zero, so training refines
    # from the blank baseline instead of unlearning random output noise.
    ini.gn("head.gn", chans[0])
    ini.conv("head.conv", LATENT_CHANNELS, chans[0], 3, 3, zero=True)
    return store


def timestep_embedding(t: np.ndarray, dim: int, dtype=np.float32) -> np.ndarray:
    half = dim // 2
    freqs = np.exp(-math.log(10000.0) * np.arange(half, dtype=np.float64) / half)
    args = np.asarray(t, dtype=np.float64)[:, None] * freqs[None, :]
    emb = np.concatenate([np.cos(args), np.sin(args)], axis=1)
    if dim % 2:
        emb = np.concatenate([emb, np.zeros((emb.shape[0], 1))], axis=1)
    return emb.astype(dtype)


def frame_position_table(n_frames: int, dim: int, dtype=np.float32) -> np.ndarray:
    return timestep_embedding(np.arange(n_frames), dim, dtype)


class DenoiserModel:
    """Architecture handle: config + ParamStore + vocabulary + stage history."""

    def __init__(self, cfg: UNetConfig, store: ParamStore, vocab: Vocab | None = None,
                 stage_history: list[str] | None = None):
        self.cfg = cfg
        self.store = store
        self.vocab = vocab or grammar_vocab()
        self.stage_history: list[str] = list(stage_history or [])

    @classmethod
    def build(cls, cfg: UNetConfig | None = None, seed: int = 0, vocab: Vocab | None = None) -> "DenoiserModel":
        cfg = cfg or UNetConfig()
        vocab = vocab or grammar_vocab()
        return cls(cfg, init_params(cfg, vocab, seed), vocab)

    # -- building blocks ----------------------------------------------------

    def _resblock(self, P, prefix: str, h: Tensor, temb: Tensor) -> Tensor:
        cin = h.shape[1]
        cout = P[f"{prefix}.conv1.w"].shape[0]
        y = group_norm(h, P[f"{prefix}.gn1.g"], P[f"{prefix}.gn1.b"], _gn_groups(cin))
        y = conv2d(silu(y), P[f"{prefix}.conv1.w"], P[f"{prefix}.conv1.b"])
        tp = linear(silu(temb), P[f"{prefix}.temb.w"], P[f"{prefix}.temb.b"])
        y = y + reshape(tp, (tp.shape[0], cout, 1, 1))
        y = group_norm(y, P[f"{prefix}.gn2.g"], P[f"{prefix}.gn2.b"], _gn_groups(cout))
        y = conv2d(silu(y), P[f"{prefix}.conv2.w"], P[f"{prefix}.conv2.b"])
        if f"{prefix}.skip.w" in P:
            h = conv2d(h, P[f"{prefix}.skip.w"], P[f"{prefix}.skip.b"])
        return h + y

    def _self_attn(self, P, prefix: str, h: Tensor) -> Tensor:
        n, c, hh, ww = h.shape
        y = group_norm(h, P[f"{prefix}.gn.g"], P[f"{prefix}.gn.b"], _gn_groups(c))
        y = transpose(reshape(y, (n, c, hh * ww)), (0, 2, 1))
        q = matmul(y, P[f"{prefix}.wq"])
        k = matmul(y, P[f"{prefix}.wk"])
        v = matmul(y, P[f"{prefix}.wv"])
        att = attention(q, k, v, SPATIAL_HEADS)
        out = matmul(att, P[f"{prefix}.wo"]) + P[f"{prefix}.bo"]
        out = reshape(transpose(out, (0, 2, 1)), (n, c, hh, ww))
        return h + out

    def _cross_attn(self, P, prefix: str, h: Tensor, text_embs: list[Tensor]) -> Tensor:
        n, c, hh, ww = h.shape
        y = group_norm(h, P[f"{prefix}.gn.g"], P[f"{prefix}.gn.b"], _gn_groups(c))
        y = transpose(reshape(y, (n, c, hh * ww)), (0, 2, 1))
        q = matmul(y, P[f"{prefix}.wq"])
        rows = []
        # Per-item loop: caption lengths vary and each item must see the same
        # computation regardless of batch composition.
        for i in range(n):
            emb = reshape(text_embs[i], (1,) + text_embs[i].shape)
            k = matmul(emb, P[f"{prefix}.wk"])
            v = matmul(emb, P[f"{prefix}.wv"])
            rows.append(attention(narrow(q, 0, i, 1), k, v, SPATIAL_HEADS))
        att = concat(rows, 0) if n > 1 else rows[0]
        out = matmul(att, P[f"{prefix}.wo"]) + P[f"{prefix}.bo"]
        out = reshape(transpose(out, (0, 2, 1)), (n, c, hh, ww))
        return h + out

    def _adapter(self, P, prefix: str, h: Tensor) -> Tensor:
        y = conv2d(h, P[f"{prefix}.conv_in.w"], P[f"{prefix}.conv_in.b"])
        y = conv2d(silu(y), P[f"{prefix}.conv_mid.w"], P[f"{prefix}.conv_mid.b"])
        y = conv2d(silu(y), P[f"{prefix}.conv_out.w"], P[f"{prefix}.conv_out.b"])
        return h + y

    def _temporal(self, P, prefix: str, h: Tensor, video: tuple[int, int]) -> Tensor:
        b, f = video
        n, c, hh, ww = h.shape
        x5 = reshape(h, (b, f, c, hh, ww))
        # Residual 1D conv over the frame axis.
        xt = reshape(transpose(x5, (0, 3, 4, 2, 1)), (b * hh * ww, c, f))
        y = group_norm(xt, P[f"{prefix}.res.gn.g"], P[f"{prefix}.res.gn.b"], _gn_groups(c))
        y = conv1d_frames(silu(y), P[f"{prefix}.res.conv1.w"], P[f"{prefix}.res.conv1.b"])
        y = conv1d_frames(silu(y), P[f"{prefix}.res.conv2.w"], P[f"{prefix}.res.conv2.b"])
        xt = xt + y
        # Self-attention over frames with a fixed positional table.
        ya = group_norm(xt, P[f"{prefix}.attn.gn.g"], P[f"{prefix}.attn.gn.b"], _gn_groups(c))
        ya = transpose(ya, (0, 2, 1))  # (S, F, C)
        ya = ya + Tensor(frame_position_table(f, c, h.dtype))
        q = matmul(ya, P[f"{prefix}.attn.wq"])
        k = matmul(ya, P[f"{prefix}.attn.wk"])
        v = matmul(ya, P[f"{prefix}.attn.wv"])
        att = attention(q, k, v, self.cfg.temporal_heads)
        out = matmul(att, P[f"{prefix}.attn.wo"]) + P[f"{prefix}.attn.bo"]
        xt = xt + transpose(out, (0, 2, 1))
        x5 = transpose(reshape(xt, (b, hh, ww, c, f)), (0, 4, 3, 1, 2))
        return reshape(x5, (n, c, hh, ww))

    # -- conditioning ---------------------------------------------------------

    def embed_text(self, P, caption_ids: np.ndarray) -> Tensor:
        """Token id sequence -> (L, text_embed_dim) embedding rows."""
        return embedding(P["text.table"], np.asarray(caption_ids, dtype=np.int64))

    # -- full forwards ----------------------------------------------------------

    def _trunk(
        self,
        P: dict[str, Tensor],
        x: Tensor,
        t: np.ndarray,
        ids_per_item: list[np.ndarray],
        video: tuple[int, int] | None,
        include_adapters: bool,
        include_temporal: bool,
    ) -> Tensor:
        cfg = self.cfg
        chans = cfg.channels
        levels = len(chans)
        lowest = levels - 1

        tsin = timestep_embedding(t, cfg.base_channels, x.dtype)
        temb = linear(Tensor(tsin), P["time.w1"], P["time.b1"])
        temb = linear(silu(temb), P["time.w2"], P["time.b2"])

        text_embs = [self.embed_text(P, ids) for ids in ids_per_item]

        h = conv2d(x, P["stem.w"], P["stem.b"])
        skips: list[Tensor] = []
        for l in range(levels):
            for r in range(cfg.res_blocks_per_level):
                h = self._resblock(P, f"down{l}.res{r}", h, temb)
                if cfg.attn_lowest and l == lowest:
                    h = self._self_attn(P, f"down{l}.res{r}.sa", h)
                    h = self._cross_attn(P, f"down{l}.res{r}.ca", h, text_embs)
            if include_adapters:
                h = self._adapter(P, f"adapter.down{l}", h)
            if video is not None and include_temporal:
                h = self._temporal(P, f"temporal.down{l}", h, video)
            skips.append(h)
            if l < levels - 1:
                h = conv2d(h, P[f"downsample{l}.w"], P[f"downsample{l}.b"], stride=2)

        for l in reversed(range(levels)):
            h = concat([h, skips[l]], 1)
            for r in range(cfg.res_blocks_per_level):
                h = self._resblock(P, f"up{l}.res{r}", h, temb)
                if cfg.attn_lowest and l == lowest:
                    h = self._self_attn(P, f"up{l}.res{r}.sa", h)
                    h = self._cross_attn(P, f"up{l}.res{r}.ca", h, text_embs)
            if include_adapters:
                h = self._adapter(P, f"adapter.up{l}", h)
            if video is not None and include_temporal:
                h = self._temporal(P, f"temporal.up{l}", h, video)
            if l > 0:
                h = conv2d(upsample2x(h), P[f"upsample{l}.w"], P[f"upsample{l}.b"])

        h = group_norm(h, P["head.gn.g"], P["head.gn.b"], _gn_groups(chans[0]))
        return conv2d(silu(h), P["head.conv.w"], P["head.conv.b"])

    def forward_image(
        self,
        P: dict[str, Tensor],
        x: Tensor,
        t: np.ndarray,
        ids_per_item: list[np.ndarray],
        include_adapters: bool = True,
    ) -> Tensor:
        """Frames as independent images; temporal blocks bypassed entirely."""
        return self._trunk(P, x, t, ids_per_item, None, include_adapters, False)

    def forward_video(
        self,
        P: dict[str, Tensor],
        x: Tensor,
        t: np.ndarray,
        ids_per_clip: list[np.ndarray],
        include_adapters: bool = True,
        include_temporal: bool = True,
    ) -> Tensor:
        """x: (B, F, C, H, W); one timestep and caption per clip."""
        b, f, c, hh, ww = x.shape
        xf = reshape(x, (b * f, c, hh, ww))
        t_f = np.repeat(np.asarray(t), f)
        ids_f = [ids_per_clip[i // f] for i in range(b * f)]
        out = self._trunk(P, xf, t_f, ids_f, (b, f), include_adapters, include_temporal)
        return reshape(out, (b, f, c, hh, ww))

    # -- plain-array conveniences (no grad) ---------------------------------------

    def eps_image(self, x: np.ndarray, t: np.ndarray, ids_per_item, include_adapters=True) -> np.ndarray:
        P = self.store.tensors()
        return self.forward_image(P, Tensor(x), t, ids_per_item, include_adapters).data

    def eps_video(
        self, x: np.ndarray, t: np.ndarray, ids_per_clip, include_adapters=True, include_temporal=True
    ) -> np.ndarray:
        P = self.store.tensors()
        return self.forward_video(
            P, Tensor(x), t, ids_per_clip, include_adapters, include_temporal
        ).data

    def param_census(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for name, group in self.store.groups.items():
            counts[group] = counts.get(group, 0) + self.store.arrays[name].size
        return counts

    # -- persistence ------------------------------------------------------------

    def save(self, path, sched: NoiseSchedule | None = None) -> None:
        sched = sched or NoiseSchedule()
        meta = {
            "kind": "denoiser",
            "config": self.cfg.to_meta(),
            "schedule": sched.to_meta(),
            "stage_history": list(self.stage_history),
            "vocab": self.vocab.tokens[2:],  # NULL/UNK re-prepended on load
        }
        save_checkpoint(path, self.store, meta)

    @classmethod
    def load(cls, path) -> tuple["DenoiserModel", NoiseSchedule]:
        store, meta = load_checkpoint(path)
        if meta.get("kind") != "denoiser":
            raise FormatError(f"checkpoint holds {meta.get('kind')!r}, expected 'denoiser'")
        cfg = UNetConfig.from_meta(meta["config"])
        vocab = Vocab(meta["vocab"])
        if vocab.tokens[:2] != [NULL_TOKEN, UNK_TOKEN]:
            raise FormatError("vocabulary lost its reserved tokens")
        model = cls(cfg, store, vocab, list(meta.get("stage_history", [])))
        return model, NoiseSchedule.from_meta(meta["schedule"])
