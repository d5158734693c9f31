"""Named-parameter registry and the on-disk checkpoint archive.

Checkpoint layout (normative, little-endian throughout):

  bytes 0..7    uint64: byte length H of the JSON header
  bytes 8..8+H  UTF-8 JSON header (sorted keys):
                  {"format": "vidfactory-checkpoint", "version": 1,
                   "meta": {...},          # model config, schedule, stage history
                   "params": [{"name": str, "group": str, "shape": [int],
                               "dtype": "<f4", "offset": int}, ...],
                   "payload_bytes": int}
  bytes 8+H..   raw parameter payloads, float32 little-endian, concatenated
                in the order listed in "params"; "offset" is relative to the
                payload start.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .engine.autograd import Tensor
from .errors import FormatError, ValidationError, VersionError

PARAM_GROUPS = (
    "backbone",
    "spatial_adapter",
    "temporal",
    "refiner",
    "encoder_text",
    "encoder_audio",
)

CHECKPOINT_FORMAT = "vidfactory-checkpoint"
CHECKPOINT_VERSION = 1


class ParamStore:
    """Flat name -> array registry; every parameter carries one group tag."""

    def __init__(self):
        self.arrays: dict[str, np.ndarray] = {}
        self.groups: dict[str, str] = {}

    def add(self, name: str, array: np.ndarray, group: str) -> np.ndarray:
        if name in self.arrays:
            raise ValidationError(f"duplicate parameter name {name!r}", [name])
        if group not in PARAM_GROUPS:
            raise ValidationError(f"unknown parameter group {group!r}", [name])
        self.arrays[name] = np.ascontiguousarray(array, dtype=np.float32)
        self.groups[name] = group
        return self.arrays[name]

    def names(self) -> list[str]:
        return list(self.arrays)

    def group_names(self, group: str) -> list[str]:
        return [n for n, g in self.groups.items() if g == group]

    def present_groups(self) -> set[str]:
        return set(self.groups.values())

    def tensors(self, trainable_groups: set[str] | frozenset[str] = frozenset()) -> dict[str, Tensor]:
        """Wrap arrays as autograd tensors; only the listed groups get grads."""
        return {
            n: Tensor(a, requires_grad=self.groups[n] in trainable_groups)
            for n, a in self.arrays.items()
        }

    def clone(self) -> "ParamStore":
        out = ParamStore()
        for n, a in self.arrays.items():
            out.add(n, a.copy(), self.groups[n])
        return out

    def astype(self, dtype) -> "ParamStore":
        out = ParamStore()
        out.groups = dict(self.groups)
        out.arrays = {n: a.astype(dtype) for n, a in self.arrays.items()}
        return out

    def equal_group(self, other: "ParamStore", group: str) -> bool:
        names = self.group_names(group)
        return all(np.array_equal(self.arrays[n], other.arrays[n]) for n in names)


def save_checkpoint(path: str | Path, store: ParamStore, meta: dict) -> None:
    entries = []
    offset = 0
    payloads = []
    for name in store.names():
        arr = np.ascontiguousarray(store.arrays[name], dtype="<f4")
        entries.append(
            {
                "name": name,
                "group": store.groups[name],
                "shape": list(arr.shape),
                "dtype": "<f4",
                "offset": offset,
            }
        )
        payloads.append(arr.tobytes())
        offset += arr.nbytes
    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "meta": meta,
        "params": entries,
        "payload_bytes": offset,
    }
    hbytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(struct.pack("<Q", len(hbytes)))
        fh.write(hbytes)
        for p in payloads:
            fh.write(p)
    tmp.replace(path)


def load_checkpoint(path: str | Path) -> tuple[ParamStore, dict]:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 8:
        raise FormatError("checkpoint too short for header length field")
    (hlen,) = struct.unpack("<Q", raw[:8])
    if len(raw) < 8 + hlen:
        raise FormatError("checkpoint truncated inside JSON header")
    header = json.loads(raw[8 : 8 + hlen].decode("utf-8"))
    if header.get("format") != CHECKPOINT_FORMAT:
        raise FormatError(f"not a checkpoint file: format={header.get('format')!r}")
    if header.get("version") != CHECKPOINT_VERSION:
        raise VersionError(f"unsupported checkpoint version {header.get('version')!r}")
    payload = raw[8 + hlen :]
    if len(payload) != header["payload_bytes"]:
        raise FormatError(
            f"payload length {len(payload)} != declared {header['payload_bytes']}"
        )
    store = ParamStore()
    for ent in header["params"]:
        if ent["dtype"] != "<f4":
            raise FormatError(f"unsupported dtype {ent['dtype']!r} for {ent['name']!r}")
        n = int(np.prod(ent["shape"])) if ent["shape"] else 1
        arr = np.frombuffer(
            payload, dtype="<f4", count=n, offset=ent["offset"]
        ).reshape(ent["shape"])
        store.add(ent["name"], arr.copy(), ent["group"])
    return store, header["meta"]
