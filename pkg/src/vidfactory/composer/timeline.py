"""Timeline assembly: burn overlays into frames and mix the soundtrack.

compose() is a pure function of the timeline: overlays apply in list order
(later entries win contested pixels), audio runs for exactly
ceil(frames/fps * 16000) samples, and the background segment is truncated
to fit by default or looped behind the flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import GeometryError, ValidationError
from ..types import AUDIO_SAMPLE_RATE, VideoTensor
from .mixing import mix_audio
from .overlay import OverlaySpec, overlay_frame
from .tts import DubbingSpec, get_voice, synth_speech


@dataclass
class Timeline:
    video: VideoTensor
    background: np.ndarray | None = None
    overlays: list[OverlaySpec] = field(default_factory=list)
    dubbings: list[DubbingSpec] = field(default_factory=list)
    duck_db: float = -12.0
    ramp_ms: float = 50.0
    loop_background: bool = False

    @property
    def total_samples(self) -> int:
        frames = self.video.frames.shape[0]
        return math.ceil(frames * AUDIO_SAMPLE_RATE / self.video.fps)

    def validate(self) -> None:
        bad: list[str] = []
        h, w = self.video.frames.shape[1:3]
        for i, ov in enumerate(self.overlays):
            bad.extend(ov.validate(path=f"overlays[{i}]"))
            bw, bh = ov.box_size
            x, y = ov.position
            if x < 0 or y < 0 or x + bw > w or y + bh > h:
                raise GeometryError(
                    f"overlays[{i}] box {bw}x{bh} at ({x},{y}) exceeds {w}x{h} frame"
                )
        for i, dub in enumerate(self.dubbings):
            bad.extend(dub.validate(path=f"dubbings[{i}]"))
        if bad:
            raise ValidationError("timeline failed validation", bad)


def _fit_background(timeline: Timeline, total: int) -> np.ndarray:
    if timeline.background is None:
        return np.zeros(total, dtype=np.float32)
    bg = np.asarray(timeline.background, dtype=np.float32)
    if bg.shape[0] >= total or bg.shape[0] == 0:
        return bg[:total]
    if timeline.loop_background:
        reps = -(-total // bg.shape[0])
        return np.tile(bg, reps)[:total]
    out = np.zeros(total, dtype=np.float32)
    out[: bg.shape[0]] = bg
    return out


def compose(timeline: Timeline) -> tuple[VideoTensor, np.ndarray]:
    timeline.validate()
    video = timeline.video
    fps = video.fps

    frames = video.frames
    if timeline.overlays:
        out_frames = np.empty_like(frames)
        for f in range(frames.shape[0]):
            frame = frames[f]
            t = f / fps
            for ov in timeline.overlays:
                frame = overlay_frame(frame, ov, t)
            out_frames[f] = frame
        frames = out_frames

    total = timeline.total_samples
    dub_waves = [
        (synth_speech(d.text, get_voice(d.voice_id)), d.t_start, d.gain)
        for d in timeline.dubbings
    ]
    audio = mix_audio(
        _fit_background(timeline, total),
        dub_waves,
        duck_db=timeline.duck_db,
        ramp_ms=timeline.ramp_ms,
        total_len=total,
    )
    return VideoTensor(frames.copy(), fps=fps, orientation=video.orientation), audio
