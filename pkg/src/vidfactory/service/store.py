"""Disk-backed project records with optimistic concurrency.

State lives in one directory per project (record JSON, clip array,
export artifacts) so everything is inspectable and diff-able.  Every
mutation goes through :meth:`ProjectStore.mutate`, which serializes
writers per project and bumps the revision counter exactly once.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import NotFoundError, RevisionConflictError, ValidationError
from ..media.project import Project
from ..types import VideoTensor

RECORD_FILE = "record.json"
CLIP_FILE = "clip.npy"
EXPORT_DIR = "exports"


@dataclass
class ClipRef:
    """Pointer to the stored generated clip plus its display metadata."""

    path: str
    n_frames: int
    fps: int
    width: int
    height: int
    orientation: str
    interpolated: bool = False

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "n_frames": self.n_frames,
            "fps": self.fps,
            "width": self.width,
            "height": self.height,
            "orientation": self.orientation,
            "interpolated": self.interpolated,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ClipRef":
        return cls(
            path=doc["path"],
            n_frames=int(doc["n_frames"]),
            fps=int(doc["fps"]),
            width=int(doc["width"]),
            height=int(doc["height"]),
            orientation=doc["orientation"],
            interpolated=bool(doc.get("interpolated", False)),
        )


@dataclass
class ProjectRecord:
    """One project: document, generated clip, cached retrieval candidates."""

    project_id: str
    project: Project
    revision: int = 1
    clip: ClipRef | None = None
    candidates: dict | None = None
    created_at: float = field(default_factory=time.time)
    updated_at: float = field(default_factory=time.time)

    def to_dict(self) -> dict:
        return {
            "id": self.project_id,
            "revision": self.revision,
            "project": self.project.to_dict(),
            "clip": None if self.clip is None else self.clip.to_dict(),
            "candidates": self.candidates,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ProjectRecord":
        return cls(
            project_id=doc["id"],
            project=Project.from_dict(doc["project"]),
            revision=int(doc["revision"]),
            clip=None if doc.get("clip") is None else ClipRef.from_dict(doc["clip"]),
            candidates=doc.get("candidates"),
            created_at=float(doc.get("created_at", 0.0)),
            updated_at=float(doc.get("updated_at", 0.0)),
        )


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)


class ProjectStore:
    """Directory-per-project persistence under a state home."""

    def __init__(self, home):
        self.home = Path(home)
        self.projects_dir = self.home / "projects"
        self.projects_dir.mkdir(parents=True, exist_ok=True)
        self._master = threading.Lock()
        self._locks: dict[str, threading.RLock] = {}

    # -- locking --------------------------------------------------------------

    def _lock(self, project_id: str) -> threading.RLock:
        with self._master:
            lock = self._locks.get(project_id)
            if lock is None:
                lock = self._locks[project_id] = threading.RLock()
            return lock

    # -- paths ----------------------------------------------------------------

    def project_dir(self, project_id: str) -> Path:
        return self.projects_dir / project_id

    def export_dir(self, project_id: str) -> Path:
        return self.project_dir(project_id) / EXPORT_DIR

    def _record_path(self, project_id: str) -> Path:
        return self.project_dir(project_id) / RECORD_FILE

    # -- record I/O -------------------------------------------------------------

    def _write(self, record: ProjectRecord) -> None:
        path = self._record_path(record.project_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        data = json.dumps(record.to_dict(), sort_keys=True, indent=2, allow_nan=False)
        _atomic_write(path, data.encode("utf-8") + b"\n")

    def create(self, prompt: str, seed: int = 0) -> ProjectRecord:
        if not prompt or not prompt.strip():
            raise ValidationError("prompt must be non-empty", ["prompt"])
        project_id = uuid.uuid4().hex[:12]
        while self.project_dir(project_id).exists():  # vanishingly unlikely
            project_id = uuid.uuid4().hex[:12]
        project = Project(prompt=prompt, seed=int(seed))
        project.validate()
        record = ProjectRecord(project_id=project_id, project=project)
        with self._lock(project_id):
            self._write(record)
        return record

    def get(self, project_id: str) -> ProjectRecord:
        path = self._record_path(project_id)
        if not path.exists():
            raise NotFoundError(f"no project {project_id!r}")
        with self._lock(project_id):
            doc = json.loads(path.read_text("utf-8"))
        return ProjectRecord.from_dict(doc)

    def list_ids(self) -> list[str]:
        return sorted(
            p.name for p in self.projects_dir.iterdir() if (p / RECORD_FILE).exists()
        )

    def mutate(self, project_id: str, fn, expected_revision: int | None = None) -> ProjectRecord:
        """Apply ``fn(record)`` atomically: validate, bump revision, persist.

        ``fn`` edits the record in place and may raise; nothing is written
        in that case.  A stale ``expected_revision`` raises a conflict.
        """
        with self._lock(project_id):
            record = self.get(project_id)
            if expected_revision is not None and expected_revision != record.revision:
                raise RevisionConflictError(
                    f"expected revision {expected_revision}, record is at {record.revision}"
                )
            fn(record)
            record.project.validate()
            record.revision += 1
            record.updated_at = time.time()
            self._write(record)
            return record

    # -- clip storage -------------------------------------------------------------

    def save_clip(self, project_id: str, video: VideoTensor, interpolated: bool = False) -> ClipRef:
        path = self.project_dir(project_id) / CLIP_FILE
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".npy.tmp")
        with open(tmp, "wb") as fh:
            np.save(fh, video.frames)
        tmp.replace(path)
        return ClipRef(
            path=CLIP_FILE,
            n_frames=video.n_frames,
            fps=video.fps,
            width=video.width,
            height=video.height,
            orientation=video.orientation,
            interpolated=interpolated,
        )

    def load_clip(self, record: ProjectRecord) -> VideoTensor:
        if record.clip is None:
            raise NotFoundError(f"project {record.project_id!r} has no generated clip")
        path = self.project_dir(record.project_id) / record.clip.path
        if not path.exists():
            raise NotFoundError(f"clip file missing for project {record.project_id!r}")
        frames = np.load(path)
        return VideoTensor(frames, fps=record.clip.fps, orientation=record.clip.orientation)
