"""Unit-sphere embedding index: exact linear-scan search and persistence.

Queries are served from an immutable snapshot list; mutations build a new
list and swap it in atomically, so readers never see a half-updated index.

Index file layout (little-endian):
  bytes 0..7    uint64: byte length H of the JSON header
  bytes 8..8+H  UTF-8 JSON header (sorted keys): {"format": "vidfactory-index",
                "version": 1, "dim": 64, "count": N,
                "records": [{"asset_id", "caption", "duration"}, ...]}
  bytes 8+H..   N*dim float32 embeddings, row-major, in record order
"""

from __future__ import annotations

import json
import struct
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import FormatError, OutOfRangeError, StateError, ValidationError, VersionError
from ..types import AUDIO_SAMPLE_RATE, AudioAsset, AudioSegment, EmbeddingRecord
from .encoders import EMBED_DIM, RetrievalModel
from .mel import mel_features

INDEX_FORMAT = "vidfactory-index"
INDEX_VERSION = 1

DEFAULT_K = 3  # top 3 matches surfaced to the caller


@dataclass
class RetrievalResult:
    query: str
    ranked: list[tuple[str, float]]

    def __post_init__(self):
        scores = [s for _, s in self.ranked]
        if any(later > earlier for later, earlier in zip(scores[1:], scores)):
            raise ValidationError("scores must be non-increasing", ["ranked"])


class AudioIndex:
    """Read-mostly store of EmbeddingRecords with atomic snapshot swaps."""

    def __init__(self, records: list[EmbeddingRecord] | None = None):
        self._records: tuple[EmbeddingRecord, ...] = tuple(records or ())
        self._write_lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._records)

    def snapshot(self) -> tuple[EmbeddingRecord, ...]:
        return self._records

    def add(self, record: EmbeddingRecord) -> None:
        with self._write_lock:
            if any(r.asset_id == record.asset_id for r in self._records):
                raise ValidationError(
                    f"duplicate asset id {record.asset_id!r}", ["asset_id"]
                )
            self._records = self._records + (record,)

    def remove(self, asset_id: str) -> None:
        with self._write_lock:
            kept = tuple(r for r in self._records if r.asset_id != asset_id)
            if len(kept) == len(self._records):
                raise StateError(f"no record with asset id {asset_id!r}")
            self._records = kept


def build_index(bank: list[AudioAsset], model: RetrievalModel) -> AudioIndex:
    records = [
        EmbeddingRecord(
            asset_id=a.asset_id,
            caption=a.caption,
            embedding=model.encode_waveform(a.waveform),
            duration=a.duration,
        )
        for a in bank
    ]
    return AudioIndex(records)


def topk(
    index: AudioIndex | list[EmbeddingRecord],
    query: str,
    model: RetrievalModel,
    k: int = DEFAULT_K,
) -> RetrievalResult:
    records = index.snapshot() if isinstance(index, AudioIndex) else tuple(index)
    if not records:
        raise StateError("retrieval index is empty")
    if k < 1:
        raise ValidationError("k must be >= 1", ["k"])
    q = model.encode_text(query)
    scored = [(r.asset_id, float(r.embedding @ q)) for r in records]
    scored.sort(key=lambda t: (-t[1], t[0]))
    return RetrievalResult(query=query, ranked=scored[: min(k, len(scored))])


def select_segment(
    asset: AudioAsset, start: float = 0.0, duration: float | None = None
) -> tuple[AudioSegment, np.ndarray]:
    """Sample-exact half-open slice; sub-sample times round down to samples."""
    if duration is None:
        duration = asset.duration - start
    if start < 0 or duration <= 0 or start + duration > asset.duration + 1e-9:
        raise OutOfRangeError(
            f"segment [{start}, {start + duration}) outside asset of {asset.duration}s"
        )
    i0 = int(start * AUDIO_SAMPLE_RATE)
    i1 = int((start + duration) * AUDIO_SAMPLE_RATE)
    seg = AudioSegment(asset_id=asset.asset_id, start=start, duration=duration)
    return seg, asset.waveform[i0:i1].copy()


def save_index(path, index: AudioIndex) -> None:
    records = index.snapshot()
    header = {
        "format": INDEX_FORMAT,
        "version": INDEX_VERSION,
        "dim": EMBED_DIM,
        "count": len(records),
        "records": [
            {"asset_id": r.asset_id, "caption": r.caption, "duration": r.duration}
            for r in records
        ],
    }
    hbytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(struct.pack("<Q", len(hbytes)))
        fh.write(hbytes)
        for r in records:
            fh.write(np.ascontiguousarray(r.embedding, dtype="<f4").tobytes())
    tmp.replace(path)


def load_index(path) -> AudioIndex:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 8:
        raise FormatError("index file too short for header length field")
    (hlen,) = struct.unpack("<Q", raw[:8])
    if len(raw) < 8 + hlen:
        raise FormatError("index file truncated inside JSON header")
    header = json.loads(raw[8 : 8 + hlen].decode("utf-8"))
    if header.get("format") != INDEX_FORMAT:
        raise FormatError(f"not an index file: format={header.get('format')!r}")
    if header.get("version") != INDEX_VERSION:
        raise VersionError(f"unsupported index version {header.get('version')!r}")
    dim = header["dim"]
    count = header["count"]
    payload = raw[8 + hlen :]
    want = count * dim * 4
    if len(payload) != want:
        raise FormatError(f"embedding block is {len(payload)} bytes, expected {want}")
    embs = np.frombuffer(payload, dtype="<f4").reshape(count, dim)
    records = [
        EmbeddingRecord(
            asset_id=meta["asset_id"],
            caption=meta["caption"],
            embedding=embs[i].copy(),
            duration=meta["duration"],
        )
        for i, meta in enumerate(header["records"])
    ]
    return AudioIndex(records)
