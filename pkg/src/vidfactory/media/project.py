"""Project document: the serializable state of one composition.

UTF-8 JSON with lexicographic key order; load(save(p)) == p for every
valid project. Unknown schema versions are rejected before any field
parsing, and invariant violations surface as a single validation error
listing every offending field path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..composer.overlay import OverlaySpec
from ..composer.tts import DubbingSpec
from ..errors import ValidationError, VersionError
from ..types import ORIENTATIONS, PORTRAIT, AudioSegment

SCHEMA_VERSION = 1


@dataclass
class GenerationParams:
    ddim_steps: int = 50
    guidance_scale: float = 3.0
    n_frames: int = 8
    orientation: str = PORTRAIT
    interpolate: bool = False

    def validate(self, path: str = "generation") -> list[str]:
        bad = []
        if self.ddim_steps < 1:
            bad.append(f"{path}.ddim_steps")
        if self.guidance_scale < 0:
            bad.append(f"{path}.guidance_scale")
        if self.n_frames < 1:
            bad.append(f"{path}.n_frames")
        if self.orientation not in ORIENTATIONS:
            bad.append(f"{path}.orientation")
        return bad


@dataclass
class ExportSettings:
    fps: int = 8
    video_path: str | None = None
    audio_path: str | None = None

    def validate(self, path: str = "export") -> list[str]:
        return [] if self.fps >= 1 else [f"{path}.fps"]


@dataclass
class Project:
    prompt: str = ""
    seed: int = 0
    generation: GenerationParams = field(default_factory=GenerationParams)
    audio: AudioSegment | None = None
    overlays: list[OverlaySpec] = field(default_factory=list)
    dubbings: list[DubbingSpec] = field(default_factory=list)
    export: ExportSettings = field(default_factory=ExportSettings)
    schema_version: int = SCHEMA_VERSION

    def validate(self) -> None:
        bad: list[str] = []
        bad.extend(self.generation.validate())
        bad.extend(self.export.validate())
        if self.audio is not None:
            bad.extend(self.audio.validate(path="audio"))
        for i, ov in enumerate(self.overlays):
            bad.extend(ov.validate(path=f"overlays[{i}]"))
        for i, dub in enumerate(self.dubbings):
            bad.extend(dub.validate(path=f"dubbings[{i}]"))
        if bad:
            raise ValidationError("project failed validation", bad)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "prompt": self.prompt,
            "seed": self.seed,
            "generation": {
                "ddim_steps": self.generation.ddim_steps,
                "guidance_scale": self.generation.guidance_scale,
                "n_frames": self.generation.n_frames,
                "orientation": self.generation.orientation,
                "interpolate": self.generation.interpolate,
            },
            "audio": None
            if self.audio is None
            else {
                "asset_id": self.audio.asset_id,
                "start": self.audio.start,
                "duration": self.audio.duration,
            },
            "overlays": [
                {
                    "text": o.text,
                    "font_size": o.font_size,
                    "color": list(o.color),
                    "position": list(o.position),
                    "t_start": o.t_start,
                    # JSON has no Infinity; null means "until the end".
                    "t_end": None if o.t_end == float("inf") else o.t_end,
                    "alpha": o.alpha,
                }
                for o in self.overlays
            ],
            "dubbings": [
                {
                    "text": d.text,
                    "voice_id": d.voice_id,
                    "t_start": d.t_start,
                    "gain": d.gain,
                }
                for d in self.dubbings
            ],
            "export": {
                "fps": self.export.fps,
                "video_path": self.export.video_path,
                "audio_path": self.export.audio_path,
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Project":
        version = doc.get("schema_version")
        if version != SCHEMA_VERSION:
            raise VersionError(f"unknown project schema_version {version!r}")
        gen = doc.get("generation", {})
        audio = doc.get("audio")
        project = cls(
            prompt=doc.get("prompt", ""),
            seed=int(doc.get("seed", 0)),
            generation=GenerationParams(
                ddim_steps=int(gen.get("ddim_steps", 50)),
                guidance_scale=float(gen.get("guidance_scale", 3.0)),
                n_frames=int(gen.get("n_frames", 8)),
                orientation=gen.get("orientation", PORTRAIT),
                interpolate=bool(gen.get("interpolate", False)),
            ),
            audio=None
            if audio is None
            else AudioSegment(
                asset_id=audio["asset_id"],
                start=float(audio["start"]),
                duration=float(audio["duration"]),
            ),
            overlays=[
                OverlaySpec(
                    text=o["text"],
                    font_size=int(o["font_size"]),
                    color=tuple(int(c) for c in o["color"]),
                    position=tuple(int(p) for p in o["position"]),
                    t_start=float(o["t_start"]),
                    t_end=float("inf") if o.get("t_end") is None else float(o["t_end"]),
                    alpha=float(o.get("alpha", 1.0)),
                )
                for o in doc.get("overlays", [])
            ],
            dubbings=[
                DubbingSpec(
                    text=d["text"],
                    voice_id=d["voice_id"],
                    t_start=float(d["t_start"]),
                    gain=float(d.get("gain", 1.0)),
                )
                for d in doc.get("dubbings", [])
            ],
            export=ExportSettings(
                fps=int(doc.get("export", {}).get("fps", 8)),
                video_path=doc.get("export", {}).get("video_path"),
                audio_path=doc.get("export", {}).get("audio_path"),
            ),
            schema_version=version,
        )
        project.validate()
        return project


def project_bytes(project: Project) -> bytes:
    project.validate()
    doc = json.dumps(project.to_dict(), sort_keys=True, indent=2, allow_nan=False)
    return doc.encode("utf-8") + b"\n"


def save_project(project: Project, path) -> bytes:
    data = project_bytes(project)
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    tmp = p.with_suffix(p.suffix + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(p)
    return data


def load_project(source) -> Project:
    if isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    else:
        raw = Path(source).read_bytes()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"project document is not valid JSON: {exc}", []) from exc
    return Project.from_dict(doc)
