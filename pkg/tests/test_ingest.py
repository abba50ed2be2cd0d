import json
import struct
import wave

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from vidtrust.errors import (
    CorruptFileError,
    NotFoundError,
    ParseError,
    SourceUnavailableError,
    UnsupportedFormatError,
    ValidationError,
)
from vidtrust.ingest import (
    FixtureVideoSource,
    VideoMetadata,
    fetch_video,
    load_audio,
    load_metadata,
)

from conftest import write_wav


class TestLoadMetadata:
    def test_field_copy(self):
        meta = load_metadata(
            {"video_id": "v1", "title": "News bulletin", "duration_seconds": 75,
             "view_count": 1200}
        )
        assert meta.title == "News bulletin"
        assert meta.duration_seconds == 75
        assert meta.view_count == 1200

    def test_missing_like_count_defaults_zero(self):
        meta = load_metadata({"video_id": "v1", "title": "t"})
        assert meta.like_count == 0
        assert meta.view_count == 0
        assert meta.description == ""

    def test_missing_title_rejected(self):
        with pytest.raises(ValidationError, match="title"):
            load_metadata({"video_id": "v1"})

    def test_missing_video_id_rejected(self):
        with pytest.raises(ValidationError, match="video_id"):
            load_metadata({"title": "t"})

    def test_wrong_type_names_field(self):
        with pytest.raises(ParseError, match="view_count"):
            load_metadata({"video_id": "v", "title": "t", "view_count": "many"})

    def test_malformed_json_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ParseError):
            load_metadata(path)

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "v.json"
        path.write_text(json.dumps({"video_id": "v9", "title": "T"}), encoding="utf-8")
        assert load_metadata(path).video_id == "v9"

    def test_negative_duration_rejected(self):
        with pytest.raises(ValidationError):
            VideoMetadata(video_id="v", title="t", duration_seconds=-1)


class TestLoadAudio:
    def test_header_copy(self, wav_writer):
        path = wav_writer("mono.wav", np.zeros(44100), 44100, "int16")
        buf = load_audio(path)
        assert len(buf) == 44100
        assert buf.sample_rate_hz == 44100

    def test_symmetric_stereo_downmixes_to_zero(self, wav_writer):
        stereo = np.stack([np.full(1000, 0.5), np.full(1000, -0.5)], axis=1)
        buf = load_audio(wav_writer("st.wav", stereo, 16000, "int16"))
        assert len(buf) == 1000
        assert np.allclose(buf.samples, 0.0, atol=1 / 32768)

    def test_int16_min_maps_to_minus_one(self, tmp_path):
        # raw int16 payload written by hand, then cross-checked against the
        # stdlib wave reader as an independent oracle
        payload = struct.pack("<4h", -32768, 32767, 0, 16384)
        blob = (
            b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
            + b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, 16000, 32000, 2, 16)
            + b"data" + struct.pack("<I", len(payload)) + payload
        )
        path = tmp_path / "extremes.wav"
        path.write_bytes(blob)

        buf = load_audio(path)
        assert buf.samples[0] == -1.0
        assert buf.samples[1] == pytest.approx(32767 / 32768)

        with wave.open(str(path)) as oracle:
            assert oracle.getnchannels() == 1
            assert oracle.getframerate() == 16000
            raw = struct.unpack("<4h", oracle.readframes(4))
        assert np.allclose(buf.samples, np.array(raw) / 32768.0)

    def test_uint8_scaling(self, wav_writer):
        buf = load_audio(wav_writer("u8.wav", np.array([0.0, 0.5, -1.0]), 16000, "uint8"))
        assert buf.samples[0] == pytest.approx(0.0)
        assert buf.samples[2] == pytest.approx(-1.0)

    def test_float32_passthrough_and_clamp(self, wav_writer, tmp_path):
        buf = load_audio(wav_writer("f32.wav", np.array([0.25, -0.75]), 48000, "float32"))
        assert np.allclose(buf.samples, [0.25, -0.75], atol=1e-7)
        # out-of-range float samples clamp rather than violate the invariant
        hot = np.array([1.5, -2.0], dtype=np.float32)
        path = tmp_path / "hot.wav"
        write_wav(path, hot, 16000, "float32")
        assert np.array_equal(load_audio(path).samples, [1.0, -1.0])

    def test_not_riff_rejected(self, tmp_path):
        path = tmp_path / "x.wav"
        path.write_bytes(b"OggS" + b"\x00" * 64)
        with pytest.raises(UnsupportedFormatError):
            load_audio(path)

    def test_compressed_codec_rejected(self, tmp_path):
        payload = b"\x00" * 16
        blob = (
            b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
            + b"fmt " + struct.pack("<IHHIIHH", 16, 85, 1, 16000, 32000, 2, 16)  # mp3 tag
            + b"data" + struct.pack("<I", len(payload)) + payload
        )
        path = tmp_path / "mp3.wav"
        path.write_bytes(blob)
        with pytest.raises(UnsupportedFormatError):
            load_audio(path)

    def test_nan_float_samples_rejected(self, tmp_path):
        payload = struct.pack("<2f", float("nan"), 0.5)
        blob = (
            b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
            + b"fmt " + struct.pack("<IHHIIHH", 16, 3, 1, 16000, 64000, 4, 32)
            + b"data" + struct.pack("<I", len(payload)) + payload
        )
        path = tmp_path / "nan.wav"
        path.write_bytes(blob)
        with pytest.raises(CorruptFileError, match="non-finite"):
            load_audio(path)

    def test_truncated_data_chunk(self, wav_writer):
        path = wav_writer("trunc.wav", np.zeros(1000), 16000, "int16",
                          truncate_data_bytes=100)
        with pytest.raises(CorruptFileError):
            load_audio(path)

    def test_three_channels_rejected(self, tmp_path):
        payload = b"\x00" * 12
        blob = (
            b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
            + b"fmt " + struct.pack("<IHHIIHH", 16, 1, 3, 16000, 96000, 6, 16)
            + b"data" + struct.pack("<I", len(payload)) + payload
        )
        path = tmp_path / "3ch.wav"
        path.write_bytes(blob)
        with pytest.raises(UnsupportedFormatError):
            load_audio(path)

    def test_unlisted_sample_rate_rejected(self, tmp_path):
        write_wav(tmp_path / "odd.wav", np.zeros(100), 11025, "int16")
        with pytest.raises(ValidationError):
            load_audio(tmp_path / "odd.wav")

    def test_deterministic(self, wav_writer):
        rng = np.random.default_rng(1)
        path = wav_writer("det.wav", rng.uniform(-1, 1, 5000), 44100, "int16")
        a, b = load_audio(path), load_audio(path)
        assert np.array_equal(a.samples, b.samples)

    @given(
        n=st.integers(min_value=1, max_value=400),
        fmt=st.sampled_from(["int16", "uint8", "float32"]),
        stereo=st.booleans(),
        seed=st.integers(min_value=0, max_value=2**31),
    )
    @settings(max_examples=50, deadline=None,
              suppress_health_check=[HealthCheck.function_scoped_fixture])
    def test_samples_always_in_range(self, n, fmt, stereo, seed, tmp_path):
        # reusing one tmp dir across examples is fine: each one overwrites
        rng = np.random.default_rng(seed)
        shape = (n, 2) if stereo else (n,)
        samples = rng.uniform(-1, 1, size=shape)
        path = write_wav(tmp_path / "prop.wav", samples, 16000, fmt)
        buf = load_audio(path)
        assert len(buf) == n  # downmix preserves duration
        assert np.abs(buf.samples).max() <= 1.0


class TestFetchVideo:
    def test_fixture_round_trip(self, fixture_video_dir):
        meta, buf = fetch_video("vid001", FixtureVideoSource(fixture_video_dir))
        assert meta.video_id == "vid001"
        assert buf.sample_rate_hz == 44100
        assert len(buf) == 3 * 44100

    def test_missing_wav_not_found(self, fixture_video_dir):
        with pytest.raises(NotFoundError):
            fetch_video("vid999", FixtureVideoSource(fixture_video_dir))

    def test_empty_id_rejected_before_adapter(self, tmp_path):
        class Exploding:
            def fetch(self, video_id):
                raise AssertionError("adapter must not be reached")

        with pytest.raises(ValidationError):
            fetch_video("", Exploding())

    def test_missing_directory_unavailable(self, tmp_path):
        with pytest.raises(SourceUnavailableError):
            fetch_video("vid001", FixtureVideoSource(tmp_path / "nope"))
