"""Embedded 8x8 bitmap face covering ASCII 32-126 plus a replacement glyph.

Each glyph is 8 rows of 8 pixels. The numeric form is one byte per row,
row-major top to bottom, MSB = leftmost pixel; FONT_TABLE holds the 95
in-repertoire glyphs keyed by code point. Code points outside the
repertoire render as the hollow-square replacement glyph, never fail.

The art strings below are the authored source ('X' = on, '.' = off); the
byte table is derived from them at import and validated for shape.
"""

from __future__ import annotations

import numpy as np

FIRST_CODEPOINT = 32
LAST_CODEPOINT = 126

_ART: dict[str, tuple[str, ...]] = {
    " ": (
        "........",
        "........",
        "........",
        "........",
        "........",
        "........",
        "........",
        "........",
    ),
    "!": (
        "..XX....",
        "..XX....",
        "..XX....",
        "..XX....",
        "..XX....",
        "........",
        "..XX....",
        "........",
    ),
    '"': (
        ".X..X...",
        ".X..X...",
        ".X..X...",
        "........",
        "........",
        "........",
        "........",
        "........",
    ),
    "#": (
        "..X.X...",
        "..X.X...",
        ".XXXXX..",
        "..X.X...",
        ".XXXXX..",
        "..X.X...",
        "..X.X...",
        "........",
    ),
    "$": (
        "...X....",
        "..XXXX..",
        ".X.X....",
        "..XXX...",
        "...X.X..",
        ".XXXX...",
        "...X....",
        "........",
    ),
    "%": (
        ".XX...X.",
        ".XX..X..",
        "....X...",
        "...X....",
        "..X.....",
        ".X..XX..",
        "X...XX..",
        "........",
    ),
    "&": (
        "..XX....",
        ".X..X...",
        ".X..X...",
        "..XX....",
        ".X..X.X.",
        ".X...X..",
        "..XXX.X.",
        "........",
    ),
    "'": (
        "...X....",
        "...X....",
        "..X.....",
        "........",
        "........",
        "........",
        "........",
        "........",
    ),
    "(": (
        "....X...",
        "...X....",
        "..X.....",
        "..X.....",
        "..X.....",
        "...X....",
        "....X...",
        "........",
    ),
    ")": (
        "..X.....",
        "...X....",
        "....X...",
        "....X...",
        "....X...",
        "...X....",
        "..X.....",
        "........",
    ),
    "*": (
        "........",
        "...X....",
        ".X.X.X..",
        "..XXX...",
        ".X.X.X..",
        "...X....",
        "........",
        "........",
    ),
    "+": (
        "........",
        "...X....",
        "...X....",
        ".XXXXX..",
        "...X....",
        "...X....",
        "........",
        "........",
    ),
    ",": (
        "........",
        "........",
        "........",
        "........",
        "........",
        "..XX....",
        "..XX....",
        ".X......",
    ),
    "-": (
        "........",
        "........",
        "........",
        ".XXXXX..",
        "........",
        "........",
        "........",
        "........",
    ),
    ".": (
        "........",
        "........",
        "........",
        "........",
        "........",
        "..XX....",
        "..XX....",
        "........",
    ),
    "/": (
        "......X.",
        ".....X..",
        "....X...",
        "...X....",
        "..X.....",
        ".X......",
        "X.......",
        "........",
    ),
    "0": (
        "..XXX...",
        ".X...X..",
        ".X..XX..",
        ".X.X.X..",
        ".XX..X..",
        ".X...X..",
        "..XXX...",
        "........",
    ),
    "1": (
        "...X....",
        "..XX....",
        "...X....",
        "...X....",
        "...X....",
        "...X....",
        ".XXXXX..",
        "........",
    ),
    "2": (
        "..XXX...",
        ".X...X..",
        ".....X..",
        "....X...",
        "...X....",
        "..X.....",
        ".XXXXX..",
        "........",
    ),
    "3": (
        "..XXX...",
        ".X...X..",
        ".....X..",
        "...XX...",
        ".....X..",
        ".X...X..",
        "..XXX...",
        "........",
    ),
    "4": (
        "....X...",
        "...XX...",
        "..X.X...",
        ".X..X...",
        ".XXXXX..",
        "....X...",
        "....X...",
        "........",
    ),
    "5": (
        ".XXXXX..",
        ".X......",
        ".XXXX...",
        ".....X..",
        ".....X..",
        ".X...X..",
        "..XXX...",
        "........",
    ),
    "6": (
        "..XXX...",
        ".X......",
        ".X......",
        ".XXXX...",
        ".X...X..",
        ".X...X..",
        "..XXX...",
        "........",
    ),
    "7": (
        ".XXXXX..",
        ".....X..",
        "....X...",
        "....X...",
        "...X....",
        "...X....",
        "...X....",
        "........",
    ),
    "8": (
        "..XXX...",
        ".X...X..",
        ".X...X..",
        "..XXX...",
        ".X...X..",
        ".X...X..",
        "..XXX...",
        "........",
    ),
    "9": (
        "..XXX...",
        ".X...X..",
        ".X...X..",
        "..XXXX..",
        ".....X..",
        ".....X..",
        "..XXX...",
        "........",
    ),
    ":": (
        "........",
        "..XX....",
        "..XX....",
        "........",
        "..XX....",
        "..XX....",
        "........",
        "........",
    ),
    ";": (
        "........",
        "..XX....",
        "..XX....",
        "........",
        "..XX....",
        "..XX....",
        ".X......",
        "........",
    ),
    "<": (
        ".....X..",
        "....X...",
        "...X....",
        "..X.....",
        "...X....",
        "....X...",
        ".....X..",
        "........",
    ),
    "=": (
        "........",
        "........",
        ".XXXXX..",
        "........",
        ".XXXXX..",
        "........",
        "........",
        "........",
    ),
    ">": (
        ".X......",
        "..X.....",
        "...X....",
        "....X...",
        "...X....",
        "..X.....",
        ".X......",
        "........",
    ),
    "?": (
        "..XXX...",
        ".X...X..",
        ".....X..",
        "....X...",
        "...X....",
        "........",
        "...X....",
        "........",
    ),
    "@": (
        "..XXX...",
        ".X...X..",
        ".X.XXX..",
        ".X.X.X..",
        ".X.XXX..",
        ".X......",
        "..XXX...",
        "........",
    ),
    "A": (
        "..XXX...",
        ".X...X..",
        ".X...X..",
        ".XXXXX..",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        "........",
    ),
    "B": (
        ".XXXX...",
        ".X...X..",
        ".X...X..",
        ".XXXX...",
        ".X...X..",
        ".X...X..",
        ".XXXX...",
        "........",
    ),
    "C": (
        "..XXX...",
        ".X...X..",
        ".X......",
        ".X......",
        ".X......",
        ".X...X..",
        "..XXX...",
        "........",
    ),
    "D": (
        ".XXXX...",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        ".XXXX...",
        "........",
    ),
    "E": (
        ".XXXXX..",
        ".X......",
        ".X......",
        ".XXXX...",
        ".X......",
        ".X......",
        ".XXXXX..",
        "........",
    ),
    "F": (
        ".XXXXX..",
        ".X......",
        ".X......",
        ".XXXX...",
        ".X......",
        ".X......",
        ".X......",
        "........",
    ),
    "G": (
        "..XXX...",
        ".X...X..",
        ".X......",
        ".X..XX..",
        ".X...X..",
        ".X...X..",
        "..XXXX..",
        "........",
    ),
    "H": (
        ".X...X..",
        ".X...X..",
        ".X...X..",
        ".XXXXX..",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        "........",
    ),
    "I": (
        ".XXXXX..",
        "...X....",
        "...X....",
        "...X....",
        "...X....",
        "...X....",
        ".XXXXX..",
        "........",
    ),
    "J": (
        "...XXX..",
        "....X...",
        "....X...",
        "....X...",
        "....X...",
        ".X..X...",
        "..XX....",
        "........",
    ),
    "K": (
        ".X...X..",
        ".X..X...",
        ".X.X....",
        ".XX.....",
        ".X.X....",
        ".X..X...",
        ".X...X..",
        "........",
    ),
    "L": (
        ".X......",
        ".X......",
        ".X......",
        ".X......",
        ".X......",
        ".X......",
        ".XXXXX..",
        "........",
    ),
    "M": (
        ".X...X..",
        ".XX.XX..",
        ".X.X.X..",
        ".X.X.X..",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        "........",
    ),
    "N": (
        ".X...X..",
        ".XX..X..",
        ".X.X.X..",
        ".X..XX..",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        "........",
    ),
    "O": (
        "..XXX...",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        "..XXX...",
        "........",
    ),
    "P": (
        ".XXXX...",
        ".X...X..",
        ".X...X..",
        ".XXXX...",
        ".X......",
        ".X......",
        ".X......",
        "........",
    ),
    "Q": (
        "..XXX...",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        ".X.X.X..",
        ".X..X...",
        "..XX.X..",
        "........",
    ),
    "R": (
        ".XXXX...",
        ".X...X..",
        ".X...X..",
        ".XXXX...",
        ".X.X....",
        ".X..X...",
        ".X...X..",
        "........",
    ),
    "S": (
        "..XXXX..",
        ".X......",
        ".X......",
        "..XXX...",
        ".....X..",
        ".....X..",
        ".XXXX...",
        "........",
    ),
    "T": (
        ".XXXXX..",
        "...X....",
        "...X....",
        "...X....",
        "...X....",
        "...X....",
        "...X....",
        "........",
    ),
    "U": (
        ".X...X..",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        "..XXX...",
        "........",
    ),
    "V": (
        ".X...X..",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        "..X.X...",
        "...X....",
        "........",
    ),
    "W": (
        ".X...X..",
        ".X...X..",
        ".X...X..",
        ".X.X.X..",
        ".X.X.X..",
        ".XX.XX..",
        ".X...X..",
        "........",
    ),
    "X": (
        ".X...X..",
        ".X...X..",
        "..X.X...",
        "...X....",
        "..X.X...",
        ".X...X..",
        ".X...X..",
        "........",
    ),
    "Y": (
        ".X...X..",
        ".X...X..",
        "..X.X...",
        "...X....",
        "...X....",
        "...X....",
        "...X....",
        "........",
    ),
    "Z": (
        ".XXXXX..",
        ".....X..",
        "....X...",
        "...X....",
        "..X.....",
        ".X......",
        ".XXXXX..",
        "........",
    ),
    "[": (
        "..XXX...",
        "..X.....",
        "..X.....",
        "..X.....",
        "..X.....",
        "..X.....",
        "..XXX...",
        "........",
    ),
    "\\": (
        "X.......",
        ".X......",
        "..X.....",
        "...X....",
        "....X...",
        ".....X..",
        "......X.",
        "........",
    ),
    "]": (
        "..XXX...",
        "....X...",
        "....X...",
        "....X...",
        "....X...",
        "....X...",
        "..XXX...",
        "........",
    ),
    "^": (
        "...X....",
        "..X.X...",
        ".X...X..",
        "........",
        "........",
        "........",
        "........",
        "........",
    ),
    "_": (
        "........",
        "........",
        "........",
        "........",
        "........",
        "........",
        "........",
        ".XXXXX..",
    ),
    "`": (
        "..X.....",
        "...X....",
        "........",
        "........",
        "........",
        "........",
        "........",
        "........",
    ),
    "a": (
        "........",
        "........",
        "..XXX...",
        ".....X..",
        "..XXXX..",
        ".X...X..",
        "..XXXX..",
        "........",
    ),
    "b": (
        ".X......",
        ".X......",
        ".XXXX...",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        ".XXXX...",
        "........",
    ),
    "c": (
        "........",
        "........",
        "..XXX...",
        ".X......",
        ".X......",
        ".X......",
        "..XXX...",
        "........",
    ),
    "d": (
        ".....X..",
        ".....X..",
        "..XXXX..",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        "..XXXX..",
        "........",
    ),
    "e": (
        "........",
        "........",
        "..XXX...",
        ".X...X..",
        ".XXXXX..",
        ".X......",
        "..XXX...",
        "........",
    ),
    "f": (
        "...XX...",
        "..X.....",
        ".XXXX...",
        "..X.....",
        "..X.....",
        "..X.....",
        "..X.....",
        "........",
    ),
    "g": (
        "........",
        "........",
        "..XXXX..",
        ".X...X..",
        ".X...X..",
        "..XXXX..",
        ".....X..",
        "..XXX...",
    ),
    "h": (
        ".X......",
        ".X......",
        ".XXXX...",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        "........",
    ),
    "i": (
        "...X....",
        "........",
        "..XX....",
        "...X....",
        "...X....",
        "...X....",
        "..XXX...",
        "........",
    ),
    "j": (
        "....X...",
        "........",
        "...XX...",
        "....X...",
        "....X...",
        "....X...",
        ".X..X...",
        "..XX....",
    ),
    "k": (
        ".X......",
        ".X......",
        ".X..X...",
        ".X.X....",
        ".XX.....",
        ".X.X....",
        ".X..X...",
        "........",
    ),
    "l": (
        "..XX....",
        "...X....",
        "...X....",
        "...X....",
        "...X....",
        "...X....",
        "..XXX...",
        "........",
    ),
    "m": (
        "........",
        "........",
        ".XX.XX..",
        ".X.X.X..",
        ".X.X.X..",
        ".X.X.X..",
        ".X.X.X..",
        "........",
    ),
    "n": (
        "........",
        "........",
        ".XXXX...",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        "........",
    ),
    "o": (
        "........",
        "........",
        "..XXX...",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        "..XXX...",
        "........",
    ),
    "p": (
        "........",
        "........",
        ".XXXX...",
        ".X...X..",
        ".X...X..",
        ".XXXX...",
        ".X......",
        ".X......",
    ),
    "q": (
        "........",
        "........",
        "..XXXX..",
        ".X...X..",
        ".X...X..",
        "..XXXX..",
        ".....X..",
        ".....X..",
    ),
    "r": (
        "........",
        "........",
        ".X.XX...",
        ".XX..X..",
        ".X......",
        ".X......",
        ".X......",
        "........",
    ),
    "s": (
        "........",
        "........",
        "..XXXX..",
        ".X......",
        "..XXX...",
        ".....X..",
        ".XXXX...",
        "........",
    ),
    "t": (
        "..X.....",
        "..X.....",
        ".XXXX...",
        "..X.....",
        "..X.....",
        "..X.....",
        "...XX...",
        "........",
    ),
    "u": (
        "........",
        "........",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        "..XXXX..",
        "........",
    ),
    "v": (
        "........",
        "........",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        "..X.X...",
        "...X....",
        "........",
    ),
    "w": (
        "........",
        "........",
        ".X.X.X..",
        ".X.X.X..",
        ".X.X.X..",
        ".X.X.X..",
        "..X.X...",
        "........",
    ),
    "x": (
        "........",
        "........",
        ".X...X..",
        "..X.X...",
        "...X....",
        "..X.X...",
        ".X...X..",
        "........",
    ),
    "y": (
        "........",
        "........",
        ".X...X..",
        ".X...X..",
        ".X...X..",
        "..XXXX..",
        ".....X..",
        "..XXX...",
    ),
    "z": (
        "........",
        "........",
        ".XXXXX..",
        "....X...",
        "...X....",
        "..X.....",
        ".XXXXX..",
        "........",
    ),
    "{": (
        "....XX..",
        "...X....",
        "...X....",
        "..X.....",
        "...X....",
        "...X....",
        "....XX..",
        "........",
    ),
    "|": (
        "...X....",
        "...X....",
        "...X....",
        "...X....",
        "...X....",
        "...X....",
        "...X....",
        "........",
    ),
    "}": (
        "..XX....",
        "....X...",
        "....X...",
        ".....X..",
        "....X...",
        "....X...",
        "..XX....",
        "........",
    ),
    "~": (
        "........",
        "..X.....",
        ".X.X.X..",
        "....X...",
        "........",
        "........",
        "........",
        "........",
    ),
}

_REPLACEMENT_ART = (
    "XXXXXXX.",
    "X.....X.",
    "X.....X.",
    "X.....X.",
    "X.....X.",
    "X.....X.",
    "XXXXXXX.",
    "........",
)


def _rows_to_bytes(art: tuple[str, ...]) -> tuple[int, ...]:
    rows = []
    for row in art:
        if len(row) != 8 or set(row) - {".", "X"}:
            raise ValueError(f"malformed glyph row {row!r}")
        rows.append(sum(1 << (7 - col) for col, px in enumerate(row) if px == "X"))
    if len(rows) != 8:
        raise ValueError("glyph must have exactly 8 rows")
    return tuple(rows)


FONT_TABLE: dict[int, tuple[int, ...]] = {ord(ch): _rows_to_bytes(a) for ch, a in _ART.items()}
REPLACEMENT_GLYPH: tuple[int, ...] = _rows_to_bytes(_REPLACEMENT_ART)

if sorted(FONT_TABLE) != list(range(FIRST_CODEPOINT, LAST_CODEPOINT + 1)):
    raise AssertionError("font must cover exactly ASCII 32-126")


def glyph_rows(ch: str) -> tuple[int, ...]:
    """8 row bytes for a character; out-of-repertoire falls back to replacement."""
    return FONT_TABLE.get(ord(ch), REPLACEMENT_GLYPH)


def glyph_bitmap(ch: str) -> np.ndarray:
    """(8, 8) bool array, row-major, column 0 = MSB."""
    rows = glyph_rows(ch)
    out = np.zeros((8, 8), dtype=bool)
    for r, byte in enumerate(rows):
        for c in range(8):
            out[r, c] = bool((byte >> (7 - c)) & 1)
    return out
