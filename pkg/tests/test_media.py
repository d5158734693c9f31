"""Media export: YUV math, RIFF/Y4M byte formats, project documents."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from vidfactory.composer import DubbingSpec, OverlaySpec
from vidfactory.errors import FormatError, OutOfRangeError, ValidationError, VersionError
from vidfactory.media import (
    SCHEMA_VERSION,
    ExportSettings,
    GenerationParams,
    Project,
    load_project,
    project_bytes,
    read_wav,
    read_wav_bytes,
    rgb_frame_to_yuv,
    round_half_away,
    save_project,
    wav_bytes,
    write_wav,
    write_y4m,
    y4m_bytes,
)
from vidfactory.types import AudioSegment, VideoTensor

GOLDEN = Path(__file__).parent / "golden"


# -- rounding and colour math ---------------------------------------------------


@pytest.mark.parametrize(
    "x,expected",
    [(0.5, 1.0), (1.5, 2.0), (2.5, 3.0), (-0.5, -1.0), (-1.5, -2.0),
     (0.49, 0.0), (-0.49, 0.0), (2.0, 2.0), (-3.0, -3.0), (0.0, 0.0)],
)
def test_round_half_away_table(x, expected):
    assert round_half_away(np.array([x]))[0] == expected


def _solid(rgb, h=4, w=4):
    return np.tile(np.asarray(rgb, dtype=np.float32), (h, w, 1))


@pytest.mark.parametrize(
    "rgb,expected",
    [
        ((1.0, 0.0, 0.0), (76, 85, 255)),
        ((0.0, 0.0, 0.0), (0, 128, 128)),
        ((1.0, 1.0, 1.0), (255, 128, 128)),
        ((0.5, 0.5, 0.5), (128, 128, 128)),
        ((0.0, 1.0, 0.0), (150, 44, 21)),
        ((0.0, 0.0, 1.0), (29, 255, 107)),
    ],
)
def test_rgb_to_yuv_oracles(rgb, expected):
    # Hand evaluation of the normative full-range BT.601 formulas, e.g. red:
    # Y=0.299*255=76.245->76, U=-0.168736*255+128=84.97->85,
    # V=0.5*255+128=255.5->256->clamp 255.
    y, u, v = rgb_frame_to_yuv(_solid(rgb))
    assert (int(y[0, 0]), int(u[0, 0]), int(v[0, 0])) == expected
    for plane in (y, u, v):
        assert plane.dtype == np.uint8
        assert (plane == plane[0, 0]).all()


def test_rgb_rounds_pixels_to_bytes_before_matrixing():
    # 0.4999 scales to 127.4745 -> byte 127, not 127.5.
    y, _, _ = rgb_frame_to_yuv(_solid((0.4999, 0.4999, 0.4999)))
    assert int(y[0, 0]) == 127


# -- y4m --------------------------------------------------------------------------


def _two_frame_video():
    frames = np.zeros((2, 8, 8, 3), dtype=np.float32)
    frames[1, :, :, 0] = 1.0
    return VideoTensor(frames, fps=8)


def test_y4m_header_and_layout():
    data = y4m_bytes(_two_frame_video())
    assert data.startswith(b"YUV4MPEG2 W8 H8 F8:1 Ip A1:1 C444\n")
    header_len = data.index(b"\n") + 1
    frame_block = 6 + 3 * 64
    assert len(data) == header_len + 2 * frame_block
    assert data[header_len : header_len + 6] == b"FRAME\n"


def test_y4m_golden_bytes():
    golden = (GOLDEN / "black_red_8x8.y4m").read_bytes()
    assert y4m_bytes(_two_frame_video()) == golden


def test_y4m_red_frame_planes():
    data = y4m_bytes(_two_frame_video())
    header_len = data.index(b"\n") + 1
    red = data[header_len + 6 + 3 * 64 + 6 :]
    assert red[:64] == bytes([76]) * 64
    assert red[64:128] == bytes([85]) * 64
    assert red[128:192] == bytes([255]) * 64


def test_y4m_fps_override_changes_header_only():
    video = _two_frame_video()
    a = y4m_bytes(video)
    b = y4m_bytes(video, fps=30)
    assert b.startswith(b"YUV4MPEG2 W8 H8 F30:1 Ip A1:1 C444\n")
    assert a[a.index(b"FRAME") :] == b[b.index(b"FRAME") :]


def test_y4m_rejects_out_of_range_pixels():
    frames = np.zeros((1, 8, 8, 3), dtype=np.float32)
    frames[0, 0, 0, 0] = 1.5
    with pytest.raises(OutOfRangeError):
        y4m_bytes(VideoTensor(frames))


def test_write_y4m_returns_file_bytes(tmp_path):
    path = tmp_path / "out.y4m"
    data = write_y4m(_two_frame_video(), path)
    assert path.read_bytes() == data


# -- wav --------------------------------------------------------------------------


def test_wav_golden_bytes():
    golden = (GOLDEN / "ramp16.wav").read_bytes()
    assert wav_bytes(np.linspace(-1.0, 1.0, 16)) == golden


def test_wav_header_fields():
    data = wav_bytes(np.zeros(10))
    assert data[:4] == b"RIFF"
    assert struct.unpack("<I", data[4:8])[0] == 36 + 20
    assert data[8:12] == b"WAVE"
    assert data[12:16] == b"fmt "
    fmt = struct.unpack("<IHHIIHH", data[16:36])
    assert fmt == (16, 1, 1, 16000, 32000, 2, 16)
    assert data[36:40] == b"data"
    assert struct.unpack("<I", data[40:44])[0] == 20
    assert len(data) == 64


def test_wav_quantization_endpoints():
    data = wav_bytes(np.array([-1.0, 0.0, 1.0]))
    q = np.frombuffer(data[44:], dtype="<i2")
    np.testing.assert_array_equal(q, [-32767, 0, 32767])


def test_wav_ramp_quantization_table():
    data = wav_bytes(np.linspace(-1.0, 1.0, 16))
    q = np.frombuffer(data[44:], dtype="<i2")
    np.testing.assert_array_equal(
        q,
        [-32767, -28398, -24029, -19660, -15291, -10922, -6553, -2184,
         2184, 6553, 10922, 15291, 19660, 24029, 28398, 32767],
    )


def test_wav_rejects_bad_inputs():
    with pytest.raises(OutOfRangeError):
        wav_bytes(np.zeros((2, 8)))
    with pytest.raises(OutOfRangeError):
        wav_bytes(np.array([0.0, 1.0001]))
    with pytest.raises(OutOfRangeError):
        wav_bytes(np.array([-1.1]))


def test_wav_roundtrip_values():
    wave = np.array([-1.0, -0.25, 0.0, 0.25, 1.0], dtype=np.float32)
    back = read_wav_bytes(wav_bytes(wave))
    assert back.dtype == np.float32
    np.testing.assert_allclose(back, wave, atol=1.0 / 32767)


def test_write_read_wav_files(tmp_path):
    path = tmp_path / "a.wav"
    data = write_wav(np.linspace(-0.5, 0.5, 64), path)
    assert path.read_bytes() == data
    np.testing.assert_array_equal(read_wav(path), read_wav_bytes(data))


def test_read_wav_rejects_malformed_streams():
    with pytest.raises(FormatError):
        read_wav_bytes(b"OGGS" + b"\x00" * 40)
    riff_only = b"RIFF" + struct.pack("<I", 4) + b"WAVE"
    with pytest.raises(FormatError):
        read_wav_bytes(riff_only)

    def patched(offset, value, fmt="<H"):
        good = bytearray(wav_bytes(np.zeros(4)))
        good[offset : offset + struct.calcsize(fmt)] = struct.pack(fmt, value)
        return bytes(good)

    with pytest.raises(FormatError):  # audio_format 3 (float)
        read_wav_bytes(patched(20, 3))
    with pytest.raises(FormatError):  # stereo
        read_wav_bytes(patched(22, 2))
    with pytest.raises(FormatError):  # 44.1 kHz
        read_wav_bytes(patched(24, 44100, "<I"))
    with pytest.raises(FormatError):  # 8-bit
        read_wav_bytes(patched(34, 8))


@settings(max_examples=30, deadline=None)
@given(
    hnp.arrays(
        np.float32,
        st.integers(1, 64),
        elements=st.floats(-1.0, 1.0, width=32, allow_nan=False),
    )
)
def test_wav_write_read_write_is_byte_stable(wave):
    first = wav_bytes(wave)
    second = wav_bytes(read_wav_bytes(first))
    assert first == second


# -- project documents ----------------------------------------------------------------


def _rich_project():
    return Project(
        prompt="red square moving down",
        seed=7,
        generation=GenerationParams(ddim_steps=10, guidance_scale=5.0, n_frames=4,
                                    orientation="portrait", interpolate=True),
        audio=AudioSegment(asset_id="bank-3", start=0.5, duration=2.0),
        overlays=[
            OverlaySpec(text="HI", font_size=16, color=(255, 0, 0), position=(4, 6),
                        t_start=0.0, t_end=float("inf"), alpha=0.5),
        ],
        dubbings=[DubbingSpec(text="welcome", voice_id="bass", t_start=0.25, gain=0.8)],
        export=ExportSettings(fps=16, video_path="out.y4m", audio_path="out.wav"),
    )


def test_project_roundtrip_equality():
    project = _rich_project()
    assert load_project(project_bytes(project)) == project
    assert load_project(project_bytes(Project())) == Project()


def test_project_bytes_are_canonical_json():
    raw = project_bytes(_rich_project())
    assert raw.endswith(b"\n")
    doc = json.loads(raw.decode("utf-8"))
    assert list(doc) == sorted(doc)
    assert doc["schema_version"] == SCHEMA_VERSION
    assert raw == project_bytes(load_project(raw))


def test_project_serializes_infinite_t_end_as_null():
    doc = json.loads(project_bytes(_rich_project()))
    assert doc["overlays"][0]["t_end"] is None
    back = load_project(project_bytes(_rich_project()))
    assert back.overlays[0].t_end == float("inf")


def test_project_validation_collects_field_paths():
    bad = _rich_project()
    bad.generation.ddim_steps = 0
    bad.overlays[0].font_size = 12
    bad.dubbings[0].gain = -1.0
    bad.audio = AudioSegment(asset_id="x", start=-1.0, duration=0.0)
    with pytest.raises(ValidationError) as err:
        project_bytes(bad)
    fields = err.value.fields
    for expected in ("generation.ddim_steps", "overlays[0].font_size",
                     "dubbings[0].gain", "audio.start", "audio.duration"):
        assert expected in fields


def test_project_rejects_unknown_schema_version():
    doc = json.loads(project_bytes(Project()))
    doc["schema_version"] = 2
    with pytest.raises(VersionError):
        load_project(json.dumps(doc).encode())


def test_project_rejects_malformed_json():
    with pytest.raises(ValidationError):
        load_project(b"{not json")


def test_save_project_writes_returned_bytes(tmp_path):
    path = tmp_path / "proj.json"
    data = save_project(_rich_project(), path)
    assert path.read_bytes() == data
    assert load_project(path) == _rich_project()
