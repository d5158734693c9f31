"""Operations layer binding the store, job queue, models, and audio bank.

Both the HTTP app and the CLI call through this class so behaviour is
identical regardless of transport.  Heavy resources (denoiser, retrieval
model, index, bank waveforms) load lazily and are cached.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from pathlib import Path

import numpy as np

from ..composer.timeline import Timeline, compose
from ..codec import decode
from ..diffusion.sampling import SamplerConfig, sample_ddim
from ..diffusion.unet import DenoiserModel
from ..errors import NotFoundError, StateError, ValidationError
from ..interp import interpolate_2x, load_refiner
from ..media.project import Project
from ..media.wavio import read_wav, write_wav
from ..media.y4m import write_y4m
from ..retrieval.encoders import RetrievalModel
from ..retrieval.index import DEFAULT_K, build_index, load_index, save_index, select_segment, topk
from ..toygen.audio import AudioBankConfig, make_audio_bank
from ..types import AudioAsset
from .jobs import Job, JobQueue
from .store import ProjectRecord, ProjectStore

HOME_ENV = "VIDFACTORY_HOME"
CKPT_ENV = "VIDFACTORY_CKPT"
DEFAULT_HOME = "vidfactory-home"

BANK_DIR = "bank"
BANK_MANIFEST = "bank.json"
INDEX_FILE = "index.bin"
RETRIEVAL_CKPT = "retrieval.ckpt"
REFINER_CKPT = "refiner.ckpt"

_GENERATION_FIELDS = ("ddim_steps", "guidance_scale", "n_frames", "orientation", "interpolate")


def resolve_home(home=None) -> Path:
    return Path(home or os.environ.get(HOME_ENV) or DEFAULT_HOME)


def resolve_ckpt(ckpt=None) -> Path | None:
    value = ckpt or os.environ.get(CKPT_ENV)
    return Path(value) if value else None


class ServiceContext:
    """Everything one service process needs, rooted at a state home."""

    def __init__(self, home=None, ckpt=None, workers: int = 1):
        self.home = resolve_home(home)
        self.home.mkdir(parents=True, exist_ok=True)
        self.ckpt_path = resolve_ckpt(ckpt)
        self.store = ProjectStore(self.home)
        self.jobs = JobQueue(self.home, workers=workers)
        self._model_lock = threading.Lock()
        self._denoiser = None
        self._schedule = None
        self._retrieval: RetrievalModel | None = None
        self._index = None
        self._refiner = None
        self._refiner_checked = False
        self._manifest: dict[str, dict] | None = None
        self._assets: dict[str, AudioAsset] = {}

    def close(self) -> None:
        self.jobs.shutdown()

    # -- lazy resources ------------------------------------------------------------

    def denoiser(self):
        with self._model_lock:
            if self._denoiser is None:
                if self.ckpt_path is None:
                    raise StateError(
                        f"no denoiser checkpoint configured; set {CKPT_ENV} or pass --ckpt"
                    )
                if not Path(self.ckpt_path).exists():
                    raise StateError(f"denoiser checkpoint missing at {self.ckpt_path}")
                self._denoiser, self._schedule = DenoiserModel.load(self.ckpt_path)
            return self._denoiser, self._schedule

    def refiner(self):
        with self._model_lock:
            if not self._refiner_checked:
                path = self.home / REFINER_CKPT
                self._refiner = load_refiner(path) if path.exists() else None
                self._refiner_checked = True
            return self._refiner

    def retrieval(self):
        with self._model_lock:
            if self._retrieval is None:
                ckpt = self.home / RETRIEVAL_CKPT
                index_path = self.home / INDEX_FILE
                if not ckpt.exists() or not index_path.exists():
                    raise StateError(
                        "retrieval index not built; run the dataset command first"
                    )
                self._retrieval = RetrievalModel.load(ckpt)
                self._index = load_index(index_path)
            return self._retrieval, self._index

    # -- audio bank ------------------------------------------------------------

    def _load_manifest(self) -> dict[str, dict]:
        if self._manifest is None:
            path = self.home / BANK_DIR / BANK_MANIFEST
            if not path.exists():
                raise StateError("audio bank not built; run the dataset command first")
            rows = json.loads(path.read_text("utf-8"))
            self._manifest = {row["asset_id"]: row for row in rows}
        return self._manifest

    def asset(self, asset_id: str) -> AudioAsset:
        cached = self._assets.get(asset_id)
        if cached is not None:
            return cached
        row = self._load_manifest().get(asset_id)
        if row is None:
            raise NotFoundError(f"no audio asset {asset_id!r}")
        waveform = read_wav(self.home / BANK_DIR / row["path"])
        asset = AudioAsset(
            asset_id=asset_id,
            waveform=waveform,
            caption=row["caption"],
            class_id=row["class_id"],
        )
        self._assets[asset_id] = asset
        return asset

    def build_assets(self, count: int = 48, seed: int = 0, epochs: int = 50) -> dict:
        """Synthesize the audio bank, train its encoders, and freeze the index."""
        from ..retrieval.training import train_retrieval

        bank = make_audio_bank(AudioBankConfig(count=count, seed=seed))
        bank_dir = self.home / BANK_DIR
        bank_dir.mkdir(parents=True, exist_ok=True)
        rows = []
        for asset in bank:
            name = f"{asset.asset_id}.wav"
            write_wav(asset.waveform, bank_dir / name)
            rows.append(
                {
                    "asset_id": asset.asset_id,
                    "caption": asset.caption,
                    "class_id": asset.class_id,
                    "path": name,
                    "n_samples": int(asset.waveform.shape[0]),
                }
            )
        manifest = json.dumps(rows, sort_keys=True, indent=2) + "\n"
        (bank_dir / BANK_MANIFEST).write_text(manifest, "utf-8")

        model, report = train_retrieval(bank, epochs=epochs, seed=seed)
        model.save(self.home / RETRIEVAL_CKPT)
        index = build_index(bank, model)
        save_index(self.home / INDEX_FILE, index)
        with self._model_lock:
            self._retrieval, self._index = model, index
            self._manifest = None
            self._assets.clear()
        return {
            "assets": len(bank),
            "classes": len({a.class_id for a in bank}),
            "recall_at_1": report.recall_at_1,
            "recall_at_3": report.recall_at_3,
            "epochs": report.epochs,
        }

    # -- project operations ------------------------------------------------------------

    def create_project(self, prompt: str, seed: int = 0) -> ProjectRecord:
        return self.store.create(prompt, seed)

    def get_project(self, project_id: str) -> ProjectRecord:
        return self.store.get(project_id)

    def submit_generate(self, project_id: str, overrides: dict | None = None) -> Job:
        self.denoiser()  # missing checkpoint fails at submit, not inside the job
        if overrides:
            unknown = sorted(set(overrides) - set(_GENERATION_FIELDS))
            if unknown:
                raise ValidationError(
                    "unknown sampler override fields", [f"overrides.{u}" for u in unknown]
                )

            def apply(record: ProjectRecord) -> None:
                for key, value in overrides.items():
                    setattr(record.project.generation, key, value)

            self.store.mutate(project_id, apply)
        else:
            self.store.get(project_id)
        return self.jobs.submit("generate", project_id, lambda report: self.run_generate(project_id, report))

    def run_generate(self, project_id: str, report=None) -> dict:
        model, sched = self.denoiser()
        record = self.store.get(project_id)
        project = record.project
        gen = project.generation
        cfg = SamplerConfig(
            ddim_steps=gen.ddim_steps,
            guidance_scale=gen.guidance_scale,
            n_frames=gen.n_frames,
            orientation=gen.orientation,
            seed=project.seed,
            fps=project.export.fps,
        )
        latent = sample_ddim(
            model, project.prompt, cfg, sched,
            progress=None if report is None else (lambda done, total: report(done / total)),
        )
        video = decode(latent, clamp=True)
        if gen.interpolate:
            refiner = self.refiner()
            mode = "refined" if refiner is not None else "blend"
            video = interpolate_2x(video, mode=mode, params=refiner)
        clip = self.store.save_clip(project_id, video, interpolated=gen.interpolate)

        def attach(rec: ProjectRecord) -> None:
            rec.clip = clip

        updated = self.store.mutate(project_id, attach)
        return {"clip": clip.to_dict(), "revision": updated.revision}

    def query_retrieve(
        self, project_id: str | None = None, text: str | None = None, k: int | None = None
    ) -> dict:
        model, index = self.retrieval()
        if project_id is not None:
            record = self.store.get(project_id)
            if text is None:
                text = record.project.prompt
        if text is None:
            raise ValidationError("text is required without a project", ["text"])
        result = topk(index, text, model, k=DEFAULT_K if k is None else int(k))
        doc = {
            "query": result.query,
            "ranked": [
                {"asset_id": asset_id, "score": score} for asset_id, score in result.ranked
            ],
        }
        if project_id is not None:
            def cache(rec: ProjectRecord) -> None:
                rec.candidates = doc

            self.store.mutate(project_id, cache)
        return doc

    def update_composition(
        self, project_id: str, patch: dict, expected_revision: int | None = None
    ) -> ProjectRecord:
        if not isinstance(patch, dict):
            raise ValidationError("patch must be an object", ["patch"])
        unknown = sorted(set(patch) - {"audio", "overlays", "dubbings"})
        if unknown:
            raise ValidationError(
                "unknown patch sections", [f"patch.{u}" for u in unknown]
            )

        def apply(record: ProjectRecord) -> None:
            doc = record.project.to_dict()
            for key in ("audio", "overlays", "dubbings"):
                if key in patch:
                    doc[key] = patch[key]
            project = Project.from_dict(doc)  # re-validates every invariant
            if project.audio is not None:
                asset = self.asset(project.audio.asset_id)
                bad = project.audio.validate(asset.duration, path="audio")
                if bad:
                    raise ValidationError("segment exceeds asset bounds", bad)
            record.project = project

        return self.store.mutate(project_id, apply, expected_revision)

    # -- export ------------------------------------------------------------

    def submit_export(self, project_id: str) -> Job:
        record = self.store.get(project_id)
        if record.clip is None:
            raise StateError(f"project {project_id!r} has no generated clip to export")
        return self.jobs.submit("export", project_id, lambda report: self.run_export(project_id, report))

    def run_export(self, project_id: str, report=None) -> dict:
        record = self.store.get(project_id)
        if record.clip is None:
            raise StateError(f"project {project_id!r} has no generated clip to export")
        video = self.store.load_clip(record)
        project = record.project
        background = None
        if project.audio is not None:
            asset = self.asset(project.audio.asset_id)
            _, background = select_segment(asset, project.audio.start, project.audio.duration)
        timeline = Timeline(
            video=video,
            background=background,
            overlays=list(project.overlays),
            dubbings=list(project.dubbings),
        )
        if report is not None:
            report(0.1)
        rendered, mixed = compose(timeline)
        out_dir = self.store.export_dir(project_id)
        out_dir.mkdir(parents=True, exist_ok=True)
        stem = f"rev{record.revision:04d}"
        video_path = out_dir / (project.export.video_path or f"{stem}.y4m")
        audio_path = out_dir / (project.export.audio_path or f"{stem}.wav")
        video_bytes = write_y4m(rendered, video_path)
        if report is not None:
            report(0.7)
        audio_bytes = write_wav(mixed, audio_path)
        if report is not None:
            report(1.0)
        return {
            "revision": record.revision,
            "video": str(video_path),
            "audio": str(audio_path),
            "video_sha256": hashlib.sha256(video_bytes).hexdigest(),
            "audio_sha256": hashlib.sha256(audio_bytes).hexdigest(),
        }

    # -- asset views ------------------------------------------------------------

    def asset_wav_bytes(self, asset_id: str) -> bytes:
        from ..media.wavio import wav_bytes

        return wav_bytes(self.asset(asset_id).waveform)

    def waveform_envelope(self, asset_id: str, points: int = 256) -> dict:
        if points < 1 or points > 8192:
            raise ValidationError("points must be in [1, 8192]", ["points"])
        asset = self.asset(asset_id)
        wave = asset.waveform
        n = wave.shape[0]
        mins, maxs = [], []
        for i in range(points):
            lo = i * n // points
            hi = max((i + 1) * n // points, lo + 1)
            chunk = wave[lo:hi]
            mins.append(float(chunk.min()))
            maxs.append(float(chunk.max()))
        return {
            "asset_id": asset_id,
            "duration": asset.duration,
            "points": [[lo, hi] for lo, hi in zip(mins, maxs)],
        }

    def preview_frame(self, project_id: str, frame: int) -> tuple[bytes, dict]:
        record = self.store.get(project_id)
        video = self.store.load_clip(record)
        if frame < 0 or frame >= video.n_frames:
            raise NotFoundError(
                f"frame {frame} outside clip of {video.n_frames} frames"
            )
        from ..media.y4m import round_half_away

        # Same quantization the video writer uses, so raw preview bytes
        # match the exported frame before colorspace conversion.
        rgb = np.clip(round_half_away(video.frames[frame] * 255.0), 0, 255).astype(np.uint8)
        meta = {
            "width": video.width,
            "height": video.height,
            "index": frame,
            "count": video.n_frames,
        }
        return rgb.tobytes(), meta
