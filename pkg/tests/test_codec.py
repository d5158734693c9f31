"""Space-to-depth codec: exact invertibility and layout contract."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vidfactory.codec import FACTOR, LATENT_CHANNELS, decode, encode
from vidfactory.errors import ShapeMismatchError
from vidfactory.types import VideoTensor


def _clip(rng, f=2, h=8, w=8):
    return VideoTensor(
        frames=rng.random((f, h, w, 3), dtype=np.float32), fps=8, orientation="landscape"
    )


def test_constants():
    assert FACTOR == 4
    assert LATENT_CHANNELS == 3 * FACTOR * FACTOR == 48


def test_encode_shape_and_metadata():
    rng = np.random.default_rng(0)
    video = VideoTensor(
        frames=rng.random((3, 16, 12, 3), dtype=np.float32), fps=12, orientation="portrait"
    )
    lat = encode(video)
    assert lat.data.shape == (3, 4, 3, LATENT_CHANNELS)
    assert lat.fps == 12
    assert lat.orientation == "portrait"
    assert lat.data.flags["C_CONTIGUOUS"]


def test_roundtrip_is_bit_exact():
    rng = np.random.default_rng(1)
    for _ in range(50):
        video = _clip(rng)
        out = decode(encode(video))
        np.testing.assert_array_equal(out.frames, video.frames)
        assert out.fps == video.fps
        assert out.orientation == video.orientation


def test_latent_channel_layout():
    # Channel index is ch*16 + row_in_block*4 + col_in_block: a pixel at
    # (r, c) in a 4x4 block lands in a predictable latent channel.
    frames = np.zeros((1, 4, 4, 3), dtype=np.float32)
    frames[0, 2, 3, 1] = 0.625  # green channel, block row 2, block col 3
    lat = encode(VideoTensor(frames=frames, fps=8, orientation="landscape"))
    expected_channel = 1 * 16 + 2 * 4 + 3
    assert lat.data[0, 0, 0, expected_channel] == np.float32(0.625)
    nonzero = np.nonzero(lat.data)
    assert len(nonzero[0]) == 1


@pytest.mark.parametrize("h,w", [(7, 8), (8, 6), (5, 5)])
def test_encode_rejects_unaligned_dims(h, w):
    video = VideoTensor(
        frames=np.zeros((1, h, w, 3), dtype=np.float32), fps=8, orientation="landscape"
    )
    with pytest.raises(ShapeMismatchError):
        encode(video)


def test_latent_tensor_rejects_wrong_channel_count():
    from vidfactory.codec import LatentTensor

    with pytest.raises(ShapeMismatchError):
        LatentTensor(
            data=np.zeros((1, 2, 2, 47), dtype=np.float32), fps=8, orientation="landscape"
        )


def test_decode_clamp_limits_range():
    from vidfactory.codec import LatentTensor

    lat = LatentTensor(
        data=np.linspace(-2.0, 3.0, 48, dtype=np.float32).reshape(1, 1, 1, 48),
        fps=8,
        orientation="landscape",
    )
    free = decode(lat)
    clamped = decode(lat, clamp=True)
    assert free.frames.min() < 0.0 and free.frames.max() > 1.0
    assert clamped.frames.min() >= 0.0 and clamped.frames.max() <= 1.0
    inside = (free.frames >= 0.0) & (free.frames <= 1.0)
    np.testing.assert_array_equal(clamped.frames[inside], free.frames[inside])


@settings(max_examples=30, deadline=None)
@given(
    f=st.integers(1, 3),
    hb=st.integers(1, 4),
    wb=st.integers(1, 4),
    seed=st.integers(0, 10_000),
)
def test_roundtrip_property(f, hb, wb, seed):
    rng = np.random.default_rng(seed)
    video = VideoTensor(
        frames=rng.random((f, 4 * hb, 4 * wb, 3), dtype=np.float32),
        fps=8,
        orientation="landscape",
    )
    out = decode(encode(video))
    np.testing.assert_array_equal(out.frames, video.frames)
