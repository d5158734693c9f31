"""Service layer: project store, job queue, and the HTTP facade."""

from __future__ import annotations

import hashlib
import io
import json
import threading
import time
from pathlib import Path

import numpy as np
import pytest

from vidfactory.errors import (
    NotFoundError,
    RevisionConflictError,
    StateError,
    ValidationError,
)
from vidfactory.media.wavio import read_wav_bytes
from vidfactory.service import create_app
from vidfactory.service.jobs import JOB_KINDS, RESTART_NOTE, JobQueue
from vidfactory.service.store import ProjectStore
from vidfactory.types import VideoTensor


# -- project store -------------------------------------------------------------


def _store(tmp_path) -> ProjectStore:
    return ProjectStore(tmp_path / "home")


def test_store_create_assigns_id_and_revision_one(tmp_path):
    store = _store(tmp_path)
    record = store.create("red square moving down", seed=7)
    assert len(record.project_id) == 12
    assert record.revision == 1
    assert record.project.prompt == "red square moving down"
    assert record.project.seed == 7
    assert (store.project_dir(record.project_id) / "record.json").is_file()


def test_store_create_rejects_empty_prompt(tmp_path):
    with pytest.raises(ValidationError) as err:
        _store(tmp_path).create("   ")
    assert err.value.fields == ["prompt"]


def test_store_get_unknown_raises_not_found(tmp_path):
    with pytest.raises(NotFoundError):
        _store(tmp_path).get("nope")


def test_store_records_survive_reopen(tmp_path):
    store = _store(tmp_path)
    a = store.create("first")
    b = store.create("second")
    reopened = ProjectStore(tmp_path / "home")
    assert reopened.list_ids() == sorted([a.project_id, b.project_id])
    got = reopened.get(a.project_id)
    assert got.project.to_dict() == a.project.to_dict()
    assert got.revision == a.revision


def test_store_mutate_bumps_revision_and_persists(tmp_path):
    store = _store(tmp_path)
    record = store.create("clip")

    def patch(rec):
        rec.project.generation.ddim_steps = 4

    updated = store.mutate(record.project_id, patch)
    assert updated.revision == 2
    assert ProjectStore(tmp_path / "home").get(record.project_id).project.generation.ddim_steps == 4


def test_store_mutate_stale_revision_conflicts_and_leaves_record(tmp_path):
    store = _store(tmp_path)
    record = store.create("clip")
    store.mutate(record.project_id, lambda rec: None)  # revision -> 2
    with pytest.raises(RevisionConflictError):
        store.mutate(record.project_id, lambda rec: None, expected_revision=1)
    assert store.get(record.project_id).revision == 2


def test_store_mutate_rejects_invalid_edit_without_saving(tmp_path):
    store = _store(tmp_path)
    record = store.create("clip")

    def corrupt(rec):
        rec.project.generation.ddim_steps = 0

    with pytest.raises(ValidationError):
        store.mutate(record.project_id, corrupt)
    again = ProjectStore(tmp_path / "home").get(record.project_id)
    assert again.revision == 1
    assert again.project.generation.ddim_steps == 50


def test_store_clip_roundtrip_and_missing_cases(tmp_path):
    store = _store(tmp_path)
    record = store.create("clip")
    with pytest.raises(NotFoundError):
        store.load_clip(record)

    frames = np.random.default_rng(0).random((3, 80, 48, 3)).astype(np.float32)
    video = VideoTensor(frames=frames, fps=8, orientation="portrait")
    ref = store.save_clip(record.project_id, video, interpolated=True)
    assert (ref.n_frames, ref.width, ref.height) == (3, 48, 80)
    assert ref.interpolated is True

    record.clip = ref
    loaded = store.load_clip(record)
    np.testing.assert_array_equal(loaded.frames, frames)

    (store.project_dir(record.project_id) / ref.path).unlink()
    with pytest.raises(NotFoundError):
        store.load_clip(record)


# -- job queue -------------------------------------------------------------


@pytest.fixture()
def jobq(tmp_path):
    q = JobQueue(tmp_path / "home", workers=2)
    yield q
    q.shutdown()


def test_job_kinds_are_closed_set(jobq):
    assert JOB_KINDS == ("generate", "train_stage", "export")
    with pytest.raises(StateError):
        jobq.submit("transcode", "p1", lambda report: {})


def test_job_queue_requires_a_worker(tmp_path):
    with pytest.raises(StateError):
        JobQueue(tmp_path / "home", workers=0)


def test_job_success_lifecycle_and_persistence(jobq):
    job = jobq.submit("generate", "p1", lambda report: {"answer": 42})
    doc = jobq.wait(job.job_id, timeout=10.0)
    assert doc["status"] == "done"
    assert doc["progress"] == 1.0
    assert doc["result"] == {"answer": 42}
    assert doc["error"] is None
    assert doc["started_at"] >= doc["created_at"]
    assert doc["finished_at"] >= doc["started_at"]

    on_disk = json.loads((jobq.jobs_dir / f"{job.job_id}.json").read_text("utf-8"))
    assert on_disk == doc


def test_job_progress_is_clamped_and_monotone(jobq):
    seen = []

    def work(report):
        for fraction in (0.5, 0.2, -3.0, 2.0):
            report(fraction)
            seen.append(jobq.get(job.job_id)["progress"])
        return {}

    job = jobq.submit("generate", "p-progress", work)
    jobq.wait(job.job_id, timeout=10.0)
    assert seen == [0.5, 0.5, 0.5, 1.0]


def test_job_failure_prefixes_domain_error_code(jobq):
    def boom(report):
        raise ValidationError("bad overlay", ["overlays[0].font_size"])

    job = jobq.submit("export", "p1", boom)
    doc = jobq.wait(job.job_id, timeout=10.0)
    assert doc["status"] == "failed"
    assert doc["error"] == "validation_error: bad overlay"
    assert doc["result"] is None


def test_job_failure_wraps_unexpected_exceptions(jobq):
    def boom(report):
        raise RuntimeError("worker tripped")

    job = jobq.submit("export", "p1", boom)
    doc = jobq.wait(job.job_id, timeout=10.0)
    assert doc["status"] == "failed"
    assert doc["error"] == "error: worker tripped"


def test_job_get_unknown_raises_not_found(jobq):
    with pytest.raises(NotFoundError):
        jobq.get("missing00000")


def test_job_wait_times_out_with_state_error(jobq):
    job = jobq.submit("generate", "p-slow", lambda report: time.sleep(0.4) or {})
    with pytest.raises(StateError):
        jobq.wait(job.job_id, timeout=0.05)
    assert jobq.wait(job.job_id, timeout=10.0)["status"] == "done"


def test_jobs_on_same_project_never_overlap(jobq):
    active = threading.Event()
    overlapped = []

    def work(report):
        overlapped.append(active.is_set())
        active.set()
        time.sleep(0.1)
        active.clear()
        return {}

    first = jobq.submit("generate", "p-serial", work)
    second = jobq.submit("export", "p-serial", work)
    jobq.wait(first.job_id, timeout=10.0)
    jobq.wait(second.job_id, timeout=10.0)
    assert overlapped == [False, False]


def test_restart_fails_interrupted_jobs_and_keeps_terminal_ones(tmp_path):
    home = tmp_path / "home"
    jobs_dir = home / "jobs"
    jobs_dir.mkdir(parents=True)

    def plant(job_id, status, **extra):
        doc = {
            "id": job_id,
            "kind": "generate",
            "project_id": "p1",
            "status": status,
            "progress": 0.0,
            "result": None,
            "error": None,
            "created_at": 1.0,
            "started_at": None,
            "finished_at": None,
        }
        doc.update(extra)
        (jobs_dir / f"{job_id}.json").write_text(json.dumps(doc), "utf-8")

    plant("queued000001", "queued")
    plant("running00001", "running", started_at=2.0, progress=0.4)
    plant("done00000001", "done", result={"ok": True}, progress=1.0, finished_at=3.0)

    q = JobQueue(home)
    try:
        for job_id in ("queued000001", "running00001"):
            doc = q.get(job_id)
            assert doc["status"] == "failed"
            assert doc["error"] == RESTART_NOTE
            assert doc["finished_at"] is not None
            assert json.loads((jobs_dir / f"{job_id}.json").read_text("utf-8"))["status"] == "failed"
        done = q.get("done00000001")
        assert done["status"] == "done"
        assert done["result"] == {"ok": True}
    finally:
        q.shutdown()


def test_job_get_loads_records_written_by_another_process(jobq):
    doc = {
        "id": "external0001",
        "kind": "export",
        "project_id": "p9",
        "status": "done",
        "progress": 1.0,
        "result": {"ok": 1},
        "error": None,
        "created_at": 1.0,
        "started_at": 1.0,
        "finished_at": 2.0,
    }
    (jobq.jobs_dir / "external0001.json").write_text(json.dumps(doc), "utf-8")
    assert jobq.get("external0001")["result"] == {"ok": 1}


# -- HTTP facade -------------------------------------------------------------


@pytest.fixture(scope="module")
def client(seeded_home):
    from fastapi.testclient import TestClient

    home, ckpt = seeded_home
    app = create_app(home=home, ckpt=ckpt)
    with TestClient(app) as c:
        yield c


@pytest.fixture()
def bare_client(tmp_path):
    from fastapi.testclient import TestClient

    app = create_app(home=tmp_path / "empty-home", ckpt=None)
    with TestClient(app) as c:
        yield c


def _poll(client, job_id: str, timeout: float = 120.0) -> dict:
    deadline = time.monotonic() + timeout
    while True:
        doc = client.get(f"/jobs/{job_id}").json()
        if doc["status"] in ("done", "failed"):
            return doc
        assert time.monotonic() < deadline, f"job {job_id} stuck at {doc['status']}"
        time.sleep(0.05)


def _generate(client, project_id: str, overrides: dict | None = None) -> dict:
    body = {"overrides": {"ddim_steps": 4, "n_frames": 2, **(overrides or {})}}
    resp = client.post(f"/projects/{project_id}/generate", json=body)
    assert resp.status_code == 202
    doc = _poll(client, resp.json()["job_id"])
    assert doc["status"] == "done", doc["error"]
    return doc


def test_health_reports_version(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"
    assert body["version"]


def test_create_and_fetch_project(client):
    resp = client.post("/projects", json={"prompt": "red square moving down", "seed": 3})
    assert resp.status_code == 201
    body = resp.json()
    assert body["revision"] == 1
    assert body["project"]["prompt"] == "red square moving down"
    assert body["project"]["seed"] == 3
    assert body["clip"] is None

    fetched = client.get(f"/projects/{body['id']}")
    assert fetched.status_code == 200
    assert fetched.json() == body


def test_project_not_found_envelope(client):
    resp = client.get("/projects/doesnotexist")
    assert resp.status_code == 404
    body = resp.json()
    assert body["error"]["code"] == "not_found"
    assert body["error"]["fields"] == []


def test_create_project_validates_body(client):
    resp = client.post("/projects", json={"prompt": 5})
    assert resp.status_code == 422
    assert resp.json()["error"]["fields"] == ["prompt"]

    resp = client.post("/projects", json={"prompt": "ok", "seed": True})
    assert resp.status_code == 422
    assert resp.json()["error"]["fields"] == ["seed"]

    resp = client.post("/projects", json={"prompt": "  "})
    assert resp.status_code == 422
    assert resp.json()["error"]["code"] == "validation_error"


def test_malformed_request_body_uses_error_envelope(client):
    resp = client.post("/projects", json=[1, 2, 3])
    assert resp.status_code == 422
    body = resp.json()
    assert body["error"]["code"] == "validation_error"
    assert body["error"]["fields"]


def test_generate_job_attaches_clip_and_preview(client):
    created = client.post("/projects", json={"prompt": "red square moving down"}).json()
    doc = _generate(client, created["id"])
    assert doc["result"]["clip"]["n_frames"] == 2
    assert doc["result"]["revision"] >= 2

    project = client.get(f"/projects/{created['id']}").json()
    clip = project["clip"]
    assert (clip["width"], clip["height"]) == (48, 80)
    assert clip["orientation"] == "portrait"
    assert clip["interpolated"] is False

    raw = client.get(f"/projects/{created['id']}/preview/frame/0")
    assert raw.status_code == 200
    assert raw.headers["content-type"] == "application/octet-stream"
    assert raw.headers["X-Frame-Width"] == "48"
    assert raw.headers["X-Frame-Height"] == "80"
    assert raw.headers["X-Frame-Count"] == "2"
    assert len(raw.content) == 80 * 48 * 3

    png = client.get(f"/projects/{created['id']}/preview/frame/0", params={"format": "png"})
    assert png.status_code == 200
    assert png.headers["content-type"] == "image/png"
    from PIL import Image

    decoded = np.asarray(Image.open(io.BytesIO(png.content)))
    np.testing.assert_array_equal(
        decoded, np.frombuffer(raw.content, dtype=np.uint8).reshape(80, 48, 3)
    )

    assert client.get(f"/projects/{created['id']}/preview/frame/99").status_code == 404
    bad = client.get(f"/projects/{created['id']}/preview/frame/0", params={"format": "bmp"})
    assert bad.status_code == 422
    assert bad.json()["error"]["fields"] == ["format"]


def test_generate_rejects_unknown_override(client):
    created = client.post("/projects", json={"prompt": "red square moving up"}).json()
    resp = client.post(
        f"/projects/{created['id']}/generate", json={"overrides": {"warp": 2}}
    )
    assert resp.status_code == 422
    assert resp.json()["error"]["fields"] == ["overrides.warp"]


def test_preview_before_generation_is_not_found(client):
    created = client.post("/projects", json={"prompt": "green square moving left"}).json()
    assert client.get(f"/projects/{created['id']}/preview/frame/0").status_code == 404


def test_generate_without_checkpoint_conflicts(bare_client):
    created = bare_client.post("/projects", json={"prompt": "red square moving up"}).json()
    resp = bare_client.post(f"/projects/{created['id']}/generate", json={})
    assert resp.status_code == 409
    assert resp.json()["error"]["code"] == "state_error"


def test_retrieve_without_index_conflicts(bare_client):
    resp = bare_client.post("/retrieve", json={"text": "birdsong"})
    assert resp.status_code == 409
    assert "index" in resp.json()["error"]["message"]


def test_retrieve_ranks_assets(client):
    resp = client.post("/retrieve", json={"text": "white noise hiss"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["query"] == "white noise hiss"
    assert len(body["ranked"]) == 3
    scores = [row["score"] for row in body["ranked"]]
    assert scores == sorted(scores, reverse=True)

    five = client.post("/retrieve", json={"text": "white noise hiss", "k": 5}).json()
    assert len(five["ranked"]) == 5
    assert five["ranked"][:3] == body["ranked"]


def test_retrieve_validates_arguments(client):
    resp = client.post("/retrieve", json={})
    assert resp.status_code == 422
    assert resp.json()["error"]["fields"] == ["text"]

    resp = client.post("/retrieve", json={"text": "x", "k": "three"})
    assert resp.status_code == 422
    assert resp.json()["error"]["fields"] == ["k"]

    resp = client.post("/retrieve", json={"text": "x", "k": 0})
    assert resp.status_code == 422


def test_retrieve_for_project_caches_candidates(client):
    created = client.post("/projects", json={"prompt": "rain on a tin roof"}).json()
    body = client.post("/retrieve", json={"project_id": created["id"]}).json()
    assert body["query"] == "rain on a tin roof"

    project = client.get(f"/projects/{created['id']}").json()
    assert project["candidates"] == body
    assert project["revision"] == 2


def test_retrieve_unknown_project_is_not_found(client):
    resp = client.post("/retrieve", json={"project_id": "missing"})
    assert resp.status_code == 404


def test_asset_audio_bytes_and_waveform(client):
    asset_id = client.post("/retrieve", json={"text": "noise"}).json()["ranked"][0]["asset_id"]

    resp = client.get(f"/assets/audio/{asset_id}")
    assert resp.status_code == 200
    assert resp.headers["content-type"] == "audio/wav"
    wave = read_wav_bytes(resp.content)
    assert wave.shape == (64000,)

    env = client.get(f"/assets/audio/{asset_id}/waveform").json()
    assert env["asset_id"] == asset_id
    assert env["duration"] == pytest.approx(4.0)
    assert len(env["points"]) == 256
    assert all(lo <= hi for lo, hi in env["points"])
    lows = np.array([lo for lo, _ in env["points"]], dtype=np.float32)
    highs = np.array([hi for _, hi in env["points"]], dtype=np.float32)
    assert float(lows.min()) >= float(wave.min()) - 1e-6
    assert float(highs.max()) <= float(wave.max()) + 1e-6

    small = client.get(f"/assets/audio/{asset_id}/waveform", params={"points": 16}).json()
    assert len(small["points"]) == 16
    bad = client.get(f"/assets/audio/{asset_id}/waveform", params={"points": 0})
    assert bad.status_code == 422

    assert client.get("/assets/audio/ghost").status_code == 404


def test_composition_patch_bumps_revision_with_concurrency_control(client):
    created = client.post("/projects", json={"prompt": "red square moving down"}).json()
    asset_id = client.post("/retrieve", json={"text": "noise"}).json()["ranked"][0]["asset_id"]

    patch = {
        "audio": {"asset_id": asset_id, "start": 1.0, "duration": 2.0},
        "overlays": [
            {
                "text": "HI",
                "font_size": 8,
                "color": [1.0, 0.0, 0.0],
                "position": [2, 2],
                "t_start": 0.0,
                "t_end": None,
                "alpha": 1.0,
            }
        ],
        "dubbings": [{"text": "go", "voice_id": "alto", "t_start": 0.0, "gain": 1.0}],
    }
    resp = client.post(
        f"/projects/{created['id']}/composition",
        json={"patch": patch, "expected_revision": 1},
    )
    assert resp.status_code == 200
    assert resp.json()["revision"] == 2

    stale = client.post(
        f"/projects/{created['id']}/composition",
        json={"patch": patch, "expected_revision": 1},
    )
    assert stale.status_code == 409
    assert stale.json()["error"]["code"] == "revision_conflict"

    project = client.get(f"/projects/{created['id']}").json()
    assert project["project"]["audio"]["asset_id"] == asset_id
    assert project["project"]["overlays"][0]["text"] == "HI"
    assert project["project"]["dubbings"][0]["voice_id"] == "alto"


def test_composition_patch_validation_paths(client):
    created = client.post("/projects", json={"prompt": "red square moving down"}).json()
    asset_id = client.post("/retrieve", json={"text": "noise"}).json()["ranked"][0]["asset_id"]

    resp = client.post(
        f"/projects/{created['id']}/composition", json={"patch": {"theme": "dark"}}
    )
    assert resp.status_code == 422
    assert resp.json()["error"]["fields"] == ["patch.theme"]

    resp = client.post(f"/projects/{created['id']}/composition", json={"patch": 7})
    assert resp.status_code == 422

    bad_overlay = {
        "overlays": [
            {
                "text": "HI",
                "font_size": 7,
                "color": [1.0, 0.0, 0.0],
                "position": [2, 2],
                "t_start": 0.0,
                "t_end": None,
                "alpha": 1.0,
            }
        ]
    }
    resp = client.post(
        f"/projects/{created['id']}/composition", json={"patch": bad_overlay}
    )
    assert resp.status_code == 422
    assert "overlays[0].font_size" in resp.json()["error"]["fields"]

    beyond = {"audio": {"asset_id": asset_id, "start": 3.5, "duration": 1.0}}
    resp = client.post(f"/projects/{created['id']}/composition", json={"patch": beyond})
    assert resp.status_code == 422
    assert resp.json()["error"]["fields"] == ["audio.duration"]

    ghost = {"audio": {"asset_id": "ghost", "start": 0.0, "duration": 1.0}}
    resp = client.post(f"/projects/{created['id']}/composition", json={"patch": ghost})
    assert resp.status_code == 404

    revision = client.get(f"/projects/{created['id']}").json()["revision"]
    assert revision == 1  # every rejected patch left the record untouched


def test_export_requires_generated_clip(client):
    created = client.post("/projects", json={"prompt": "red square moving down"}).json()
    resp = client.post(f"/projects/{created['id']}/export")
    assert resp.status_code == 409
    assert resp.json()["error"]["code"] == "state_error"


def test_export_is_idempotent_and_bytes_match_hashes(client):
    created = client.post("/projects", json={"prompt": "red square moving down"}).json()
    asset_id = client.post("/retrieve", json={"text": "noise"}).json()["ranked"][0]["asset_id"]
    _generate(client, created["id"])
    patch = {
        "audio": {"asset_id": asset_id, "start": 0.5, "duration": 0.25},
        "overlays": [
            {
                "text": "GO",
                "font_size": 8,
                "color": [1.0, 1.0, 0.0],
                "position": [4, 4],
                "t_start": 0.0,
                "t_end": None,
                "alpha": 0.5,
            }
        ],
        "dubbings": [{"text": "up", "voice_id": "bass", "t_start": 0.05, "gain": 0.8}],
    }
    assert (
        client.post(f"/projects/{created['id']}/composition", json={"patch": patch}).status_code
        == 200
    )

    def run_export() -> dict:
        resp = client.post(f"/projects/{created['id']}/export")
        assert resp.status_code == 202
        doc = _poll(client, resp.json()["job_id"])
        assert doc["status"] == "done", doc["error"]
        return doc["result"]

    first = run_export()
    second = run_export()
    assert first == second  # same revision, bit-identical artifacts

    video_bytes = Path(first["video"]).read_bytes()
    audio_bytes = Path(first["audio"]).read_bytes()
    assert hashlib.sha256(video_bytes).hexdigest() == first["video_sha256"]
    assert hashlib.sha256(audio_bytes).hexdigest() == first["audio_sha256"]
    assert video_bytes.startswith(b"YUV4MPEG2 W48 H80 F8:1")

    mixed = read_wav_bytes(audio_bytes)
    assert mixed.shape == (4000,)  # ceil(2 frames * 16000 / 8 fps)

    job_resp = client.post(f"/projects/{created['id']}/export")
    doc = _poll(client, job_resp.json()["job_id"])
    assert doc["result"]["revision"] == client.get(f"/projects/{created['id']}").json()["revision"]


def test_job_endpoint_unknown_id_is_not_found(client):
    resp = client.get("/jobs/nonesuch0000")
    assert resp.status_code == 404
    assert resp.json()["error"]["code"] == "not_found"
