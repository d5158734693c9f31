"""YUV4MPEG2 writer, byte-exact by construction.

Layout: `YUV4MPEG2 W{w} H{h} F{fps}:1 Ip A1:1 C444\\n`, then per frame
`FRAME\\n` followed by full planar 4:4:4 8-bit Y, U, V. RGB converts per
full-range BT.601 from the rounded byte values R,G,B = rha(pixel*255):

  Y = 0.299 R + 0.587 G + 0.114 B
  U = -0.168736 R - 0.331264 G + 0.5 B + 128
  V = 0.5 R - 0.418688 G - 0.081312 B + 128

Every rounding step is round-half-away-from-zero; results clamp to
[0, 255]. These formulas are normative for interoperating writers.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import OutOfRangeError
from ..types import VideoTensor


def round_half_away(x: np.ndarray) -> np.ndarray:
    return np.where(x >= 0, np.floor(x + 0.5), np.ceil(x - 0.5))


def rgb_frame_to_yuv(frame: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """[0,1] float RGB frame -> uint8 (Y, U, V) planes."""
    rgb = round_half_away(np.asarray(frame, dtype=np.float64) * 255.0)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    u = -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0
    v = 0.5 * r - 0.418688 * g - 0.081312 * b + 128.0
    planes = (
        np.clip(round_half_away(p), 0.0, 255.0).astype(np.uint8) for p in (y, u, v)
    )
    return tuple(planes)


def y4m_bytes(video: VideoTensor, fps: int | None = None) -> bytes:
    frames = video.frames
    if frames.min() < 0.0 or frames.max() > 1.0:
        raise OutOfRangeError(
            f"pixel values outside [0,1]: min={frames.min()}, max={frames.max()}"
        )
    fps = int(video.fps if fps is None else fps)
    h, w = frames.shape[1:3]
    parts = [f"YUV4MPEG2 W{w} H{h} F{fps}:1 Ip A1:1 C444\n".encode("ascii")]
    for f in range(frames.shape[0]):
        y, u, v = rgb_frame_to_yuv(frames[f])
        parts.append(b"FRAME\n")
        parts.append(y.tobytes())
        parts.append(u.tobytes())
        parts.append(v.tobytes())
    return b"".join(parts)


def write_y4m(video: VideoTensor, destination, fps: int | None = None) -> bytes:
    data = y4m_bytes(video, fps)
    path = Path(destination)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)
    return data
