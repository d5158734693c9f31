"""HTTP+JSON facade over the service context.

Every error response carries a stable machine-readable code in the body:
``{"error": {"code": ..., "message": ..., "fields": [...]}}``.  Handlers
are synchronous on purpose: the framework runs them in a thread pool,
and all heavy work is already delegated to the job queue.
"""

from __future__ import annotations

import io
from contextlib import asynccontextmanager

from fastapi import Body, FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import (
    ConditioningError,
    NotFoundError,
    OutOfRangeError,
    RevisionConflictError,
    StateError,
    ValidationError,
    VidFactoryError,
)
from .context import ServiceContext

_STATUS = {
    NotFoundError: 404,
    RevisionConflictError: 409,
    StateError: 409,
    ValidationError: 422,
    ConditioningError: 422,
    OutOfRangeError: 422,
}


def _status_for(exc: VidFactoryError) -> int:
    for klass, status in _STATUS.items():
        if isinstance(exc, klass):
            return status
    return 400


def _error_body(code: str, message: str, fields: list[str] | None = None) -> dict:
    return {"error": {"code": code, "message": message, "fields": fields or []}}


def create_app(home=None, ckpt=None, workers: int = 1) -> FastAPI:
    ctx = ServiceContext(home=home, ckpt=ckpt, workers=workers)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        ctx.close()

    app = FastAPI(title="vidfactory", version=__version__, lifespan=lifespan)
    app.state.ctx = ctx

    @app.exception_handler(VidFactoryError)
    def handle_domain_error(request: Request, exc: VidFactoryError):
        fields = getattr(exc, "fields", None)
        return JSONResponse(
            status_code=_status_for(exc),
            content=_error_body(exc.code, str(exc), fields),
        )

    @app.exception_handler(RequestValidationError)
    def handle_request_error(request: Request, exc: RequestValidationError):
        fields = [".".join(str(piece) for piece in err.get("loc", ())) for err in exc.errors()]
        return JSONResponse(
            status_code=422,
            content=_error_body("validation_error", "request body failed validation", fields),
        )

    # -- meta --------------------------------------------------------------

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    # -- projects --------------------------------------------------------------

    @app.post("/projects", status_code=201)
    def create_project(body: dict = Body(...)) -> dict:
        prompt = body.get("prompt")
        if not isinstance(prompt, str):
            raise ValidationError("prompt must be a string", ["prompt"])
        seed = body.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ValidationError("seed must be an integer", ["seed"])
        return ctx.create_project(prompt, seed).to_dict()

    @app.get("/projects/{project_id}")
    def get_project(project_id: str) -> dict:
        return ctx.get_project(project_id).to_dict()

    @app.post("/projects/{project_id}/generate", status_code=202)
    def generate(project_id: str, body: dict | None = Body(None)) -> dict:
        overrides = (body or {}).get("overrides")
        if overrides is not None and not isinstance(overrides, dict):
            raise ValidationError("overrides must be an object", ["overrides"])
        job = ctx.submit_generate(project_id, overrides)
        return {"job_id": job.job_id}

    @app.post("/projects/{project_id}/composition")
    def composition(project_id: str, body: dict = Body(...)) -> dict:
        patch = body.get("patch")
        if not isinstance(patch, dict):
            raise ValidationError("patch must be an object", ["patch"])
        expected = body.get("expected_revision")
        if expected is not None and (not isinstance(expected, int) or isinstance(expected, bool)):
            raise ValidationError("expected_revision must be an integer", ["expected_revision"])
        record = ctx.update_composition(project_id, patch, expected)
        return {"id": record.project_id, "revision": record.revision}

    @app.post("/projects/{project_id}/export", status_code=202)
    def export(project_id: str) -> dict:
        job = ctx.submit_export(project_id)
        return {"job_id": job.job_id}

    # -- jobs --------------------------------------------------------------

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str) -> dict:
        return ctx.jobs.get(job_id)

    # -- retrieval --------------------------------------------------------------

    @app.post("/retrieve")
    def retrieve(body: dict = Body(...)) -> dict:
        text = body.get("text")
        if text is not None and not isinstance(text, str):
            raise ValidationError("text must be a string", ["text"])
        k = body.get("k")
        if k is not None and (not isinstance(k, int) or isinstance(k, bool)):
            raise ValidationError("k must be an integer", ["k"])
        project_id = body.get("project_id")
        return ctx.query_retrieve(project_id=project_id, text=text, k=k)

    # -- assets --------------------------------------------------------------

    @app.get("/assets/audio/{asset_id}")
    def asset_audio(asset_id: str) -> Response:
        return Response(content=ctx.asset_wav_bytes(asset_id), media_type="audio/wav")

    @app.get("/assets/audio/{asset_id}/waveform")
    def asset_waveform(asset_id: str, points: int = 256) -> dict:
        return ctx.waveform_envelope(asset_id, points)

    # -- preview --------------------------------------------------------------

    @app.get("/projects/{project_id}/preview/frame/{frame}")
    def preview_frame(project_id: str, frame: int, format: str = "raw") -> Response:
        raw, meta = ctx.preview_frame(project_id, frame)
        headers = {
            "X-Frame-Width": str(meta["width"]),
            "X-Frame-Height": str(meta["height"]),
            "X-Frame-Index": str(meta["index"]),
            "X-Frame-Count": str(meta["count"]),
        }
        if format == "raw":
            return Response(content=raw, media_type="application/octet-stream", headers=headers)
        if format == "png":
            from PIL import Image
            import numpy as np

            arr = np.frombuffer(raw, dtype=np.uint8).reshape(meta["height"], meta["width"], 3)
            buf = io.BytesIO()
            Image.fromarray(arr, mode="RGB").save(buf, format="PNG")
            return Response(content=buf.getvalue(), media_type="image/png", headers=headers)
        raise ValidationError(f"unknown frame format {format!r}", ["format"])

    return app
