from .audio import AudioBankConfig, AudioClassSpec, chirp_phase, default_audio_classes, make_audio_bank
from .video import (
    COLORS,
    DIRECTIONS,
    SHAPES,
    ShapeState,
    ToyVideoConfig,
    caption_for,
    centroid,
    centroid_displacement,
    direction_agreement,
    make_video_dataset,
    render_clip,
    render_shape_frame,
)

__all__ = [
    "AudioBankConfig",
    "AudioClassSpec",
    "COLORS",
    "DIRECTIONS",
    "SHAPES",
    "ShapeState",
    "ToyVideoConfig",
    "caption_for",
    "centroid",
    "centroid_displacement",
    "chirp_phase",
    "default_audio_classes",
    "direction_agreement",
    "make_audio_bank",
    "make_video_dataset",
    "render_clip",
    "render_shape_frame",
]
