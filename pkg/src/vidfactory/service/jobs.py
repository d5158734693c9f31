"""Persistent job queue with a one-way state machine.

Jobs move queued -> running -> {done, failed} and never regress;
progress is clamped to be non-decreasing.  Every transition is written
to disk so a restart can mark interrupted work as failed instead of
silently losing it.  Workers serialize jobs per project so no two
mutating jobs touch one project at once.
"""

from __future__ import annotations

import json
import queue
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import NotFoundError, StateError, VidFactoryError

JOB_KINDS = ("generate", "train_stage", "export")
_TRANSITIONS = {
    "queued": {"running", "failed"},
    "running": {"done", "failed"},
    "done": set(),
    "failed": set(),
}
RESTART_NOTE = "interrupted by service restart"


@dataclass
class Job:
    """One unit of asynchronous work tied to a project."""

    job_id: str
    kind: str
    project_id: str
    status: str = "queued"
    progress: float = 0.0
    result: dict | None = None
    error: str | None = None
    created_at: float = field(default_factory=time.time)
    started_at: float | None = None
    finished_at: float | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.job_id,
            "kind": self.kind,
            "project_id": self.project_id,
            "status": self.status,
            "progress": self.progress,
            "result": self.result,
            "error": self.error,
            "created_at": self.created_at,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Job":
        return cls(
            job_id=doc["id"],
            kind=doc["kind"],
            project_id=doc["project_id"],
            status=doc["status"],
            progress=float(doc.get("progress", 0.0)),
            result=doc.get("result"),
            error=doc.get("error"),
            created_at=float(doc.get("created_at", 0.0)),
            started_at=doc.get("started_at"),
            finished_at=doc.get("finished_at"),
        )


class JobQueue:
    """Thread-pool queue; every job state change is persisted to disk."""

    def __init__(self, home, workers: int = 1):
        if workers < 1:
            raise StateError("worker pool needs at least one worker")
        self.jobs_dir = Path(home) / "jobs"
        self.jobs_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.RLock()
        self._jobs: dict[str, Job] = {}
        self._fns: dict[str, object] = {}
        self._project_locks: dict[str, threading.Lock] = {}
        self._queue: queue.Queue = queue.Queue()
        self._recover()
        self._workers = [
            threading.Thread(target=self._run, name=f"job-worker-{i}", daemon=True)
            for i in range(workers)
        ]
        for t in self._workers:
            t.start()

    # -- persistence ------------------------------------------------------------

    def _path(self, job_id: str) -> Path:
        return self.jobs_dir / f"{job_id}.json"

    def _write(self, job: Job) -> None:
        data = json.dumps(job.to_dict(), sort_keys=True, indent=2, allow_nan=False)
        tmp = self._path(job.job_id).with_suffix(".json.tmp")
        tmp.write_bytes(data.encode("utf-8") + b"\n")
        tmp.replace(self._path(job.job_id))

    def _recover(self) -> None:
        """Mark jobs from a previous process as failed; they cannot resume."""
        for path in sorted(self.jobs_dir.glob("*.json")):
            job = Job.from_dict(json.loads(path.read_text("utf-8")))
            if job.status in ("queued", "running"):
                job.status = "failed"
                job.error = RESTART_NOTE
                job.finished_at = time.time()
                self._write(job)
            self._jobs[job.job_id] = job

    # -- state machine ------------------------------------------------------------

    def _transition(self, job: Job, status: str) -> None:
        if status not in _TRANSITIONS[job.status]:
            raise StateError(f"job cannot move {job.status} -> {status}")
        job.status = status

    def submit(self, kind: str, project_id: str, fn) -> Job:
        """Queue ``fn(report_progress)``; its dict return becomes the result."""
        if kind not in JOB_KINDS:
            raise StateError(f"unknown job kind {kind!r}")
        job = Job(job_id=uuid.uuid4().hex[:12], kind=kind, project_id=project_id)
        with self._lock:
            self._jobs[job.job_id] = job
            self._fns[job.job_id] = fn
            self._write(job)
        self._queue.put(job.job_id)
        return job

    def get(self, job_id: str) -> dict:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                path = self._path(job_id)
                if not path.exists():
                    raise NotFoundError(f"no job {job_id!r}")
                job = Job.from_dict(json.loads(path.read_text("utf-8")))
                self._jobs[job_id] = job
            return job.to_dict()

    def wait(self, job_id: str, timeout: float = 300.0) -> dict:
        """Poll until the job reaches a terminal state (for CLI and tests)."""
        deadline = time.monotonic() + timeout
        while True:
            doc = self.get(job_id)
            if doc["status"] in ("done", "failed"):
                return doc
            if time.monotonic() > deadline:
                raise StateError(f"job {job_id!r} still {doc['status']} after {timeout}s")
            time.sleep(0.02)

    # -- workers ------------------------------------------------------------

    def _project_lock(self, project_id: str) -> threading.Lock:
        with self._lock:
            lock = self._project_locks.get(project_id)
            if lock is None:
                lock = self._project_locks[project_id] = threading.Lock()
            return lock

    def _run(self) -> None:
        while True:
            job_id = self._queue.get()
            if job_id is None:
                return
            with self._lock:
                job = self._jobs[job_id]
                fn = self._fns.pop(job_id, None)
                if job.status != "queued" or fn is None:
                    continue
                self._transition(job, "running")
                job.started_at = time.time()
                self._write(job)

            def report(fraction: float, job=job) -> None:
                with self._lock:
                    if job.status != "running":
                        return
                    clamped = min(max(float(fraction), 0.0), 1.0)
                    job.progress = max(job.progress, clamped)
                    self._write(job)

            try:
                with self._project_lock(job.project_id):
                    result = fn(report)
            except VidFactoryError as exc:
                with self._lock:
                    self._transition(job, "failed")
                    job.error = f"{exc.code}: {exc}"
                    job.finished_at = time.time()
                    self._write(job)
            except Exception as exc:  # noqa: BLE001 - job isolation boundary
                with self._lock:
                    self._transition(job, "failed")
                    job.error = f"error: {exc}"
                    job.finished_at = time.time()
                    self._write(job)
            else:
                with self._lock:
                    self._transition(job, "done")
                    job.progress = 1.0
                    job.result = result if isinstance(result, dict) else {"value": result}
                    job.finished_at = time.time()
                    self._write(job)

    def shutdown(self) -> None:
        for _ in self._workers:
            self._queue.put(None)
        for t in self._workers:
            t.join(timeout=5.0)
