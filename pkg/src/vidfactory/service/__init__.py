"""Job-queue service: persistent project store, workers, and HTTP app."""

from .app import create_app
from .context import CKPT_ENV, HOME_ENV, ServiceContext, resolve_ckpt, resolve_home
from .jobs import Job, JobQueue
from .store import ClipRef, ProjectRecord, ProjectStore

__all__ = [
    "CKPT_ENV",
    "HOME_ENV",
    "ClipRef",
    "Job",
    "JobQueue",
    "ProjectRecord",
    "ProjectStore",
    "ServiceContext",
    "create_app",
    "resolve_ckpt",
    "resolve_home",
]
