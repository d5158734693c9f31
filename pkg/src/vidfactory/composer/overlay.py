"""Screen-text rasterization and per-frame source-over compositing.

Text renders from the embedded 8x8 face scaled by an integer factor
(nearest-neighbor), so font_size must be a positive multiple of 8. The
overlay is time-gated by a half-open [t_start, t_end) window; outside it
the frame passes through bit-unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, GeometryError
from .font import glyph_bitmap

GLYPH_SIZE = 8


@dataclass
class OverlaySpec:
    text: str
    font_size: int = 8
    color: tuple[int, int, int] = (255, 255, 255)
    position: tuple[int, int] = (0, 0)  # (x, y) top-left of the text box
    t_start: float = 0.0
    t_end: float = float("inf")
    alpha: float = 1.0

    def validate(self, path: str = "overlay") -> list[str]:
        bad = []
        if self.font_size <= 0 or self.font_size % GLYPH_SIZE:
            bad.append(f"{path}.font_size")
        if len(self.color) != 3 or any(not 0 <= int(c) <= 255 for c in self.color):
            bad.append(f"{path}.color")
        if not self.t_start < self.t_end:
            bad.append(f"{path}.t_start")
        if not 0.0 <= self.alpha <= 1.0:
            bad.append(f"{path}.alpha")
        return bad

    @property
    def box_size(self) -> tuple[int, int]:
        """(width, height) of the rendered text box in pixels."""
        scale = self.font_size // GLYPH_SIZE
        return GLYPH_SIZE * scale * len(self.text), self.font_size

    def active_at(self, t: float) -> bool:
        return self.t_start <= t < self.t_end


def rasterize_text(
    text: str,
    font_size: int,
    color: tuple[int, int, int],
    alpha: float = 1.0,
) -> np.ndarray:
    """RGBA float32 bitmap in [0,1]: (font_size, 8*scale*chars, 4).

    Glyph-on pixels carry (color/255, alpha); glyph-off pixels are fully
    transparent. Unsupported code points render the replacement glyph.
    """
    if font_size <= 0 or font_size % GLYPH_SIZE:
        raise ConfigurationError(
            f"font_size must be a positive multiple of {GLYPH_SIZE}, got {font_size}"
        )
    scale = font_size // GLYPH_SIZE
    if text:
        mask = np.concatenate([glyph_bitmap(ch) for ch in text], axis=1)
    else:
        mask = np.zeros((GLYPH_SIZE, 0), dtype=bool)
    mask = np.kron(mask, np.ones((scale, scale), dtype=bool))
    out = np.zeros(mask.shape + (4,), dtype=np.float32)
    rgb = np.asarray(color, dtype=np.float32) / 255.0
    out[mask, :3] = rgb
    out[mask, 3] = alpha
    return out


def overlay_frame(frame: np.ndarray, overlay: OverlaySpec, t: float) -> np.ndarray:
    """Source-over composite when t is inside the overlay window.

    Inactive overlays return the input array unchanged (same object), which
    is the bit-exact pass-through the time gate promises.
    """
    if not overlay.active_at(t):
        return frame
    h, w = frame.shape[:2]
    bw, bh = overlay.box_size
    x, y = overlay.position
    if x < 0 or y < 0 or x + bw > w or y + bh > h:
        raise GeometryError(
            f"overlay box {bw}x{bh} at ({x},{y}) exceeds {w}x{h} frame"
        )
    bitmap = rasterize_text(overlay.text, overlay.font_size, overlay.color, overlay.alpha)
    if bitmap.shape[1] == 0:
        return frame
    out = frame.copy()
    region = out[y : y + bh, x : x + bw]
    a = bitmap[..., 3:4]
    region[...] = a * bitmap[..., :3] + (1.0 - a) * region
    return out
