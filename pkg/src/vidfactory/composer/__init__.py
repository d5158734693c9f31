from .font import FONT_TABLE, REPLACEMENT_GLYPH, glyph_bitmap, glyph_rows
from .mixing import duck_envelope, mix_audio
from .overlay import OverlaySpec, overlay_frame, rasterize_text
from .timeline import Timeline, compose
from .tts import (
    VOICES,
    DubbingSpec,
    VoicePreset,
    get_voice,
    list_voices,
    speech_duration,
    synth_speech,
    tone_frequency,
)

__all__ = [
    "FONT_TABLE",
    "REPLACEMENT_GLYPH",
    "glyph_bitmap",
    "glyph_rows",
    "duck_envelope",
    "mix_audio",
    "OverlaySpec",
    "overlay_frame",
    "rasterize_text",
    "Timeline",
    "compose",
    "VOICES",
    "DubbingSpec",
    "VoicePreset",
    "get_voice",
    "list_voices",
    "speech_duration",
    "synth_speech",
    "tone_frequency",
]
