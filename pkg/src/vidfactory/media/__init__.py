from .project import (
    SCHEMA_VERSION,
    ExportSettings,
    GenerationParams,
    Project,
    load_project,
    project_bytes,
    save_project,
)
from .wavio import read_wav, read_wav_bytes, wav_bytes, write_wav
from .y4m import rgb_frame_to_yuv, round_half_away, write_y4m, y4m_bytes

__all__ = [
    "SCHEMA_VERSION",
    "ExportSettings",
    "GenerationParams",
    "Project",
    "load_project",
    "project_bytes",
    "save_project",
    "read_wav",
    "read_wav_bytes",
    "wav_bytes",
    "write_wav",
    "rgb_frame_to_yuv",
    "round_half_away",
    "write_y4m",
    "y4m_bytes",
]
