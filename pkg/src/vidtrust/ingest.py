"""Video metadata + audio acquisition.

Everything the pipeline consumes enters through here: a JSON metadata
document and a PCM WAV audio track, resolved either from a local fixture
directory or from any adapter implementing :class:`VideoSource`.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Protocol

import numpy as np

from .errors import (
    CorruptFileError,
    NotFoundError,
    ParseError,
    SourceUnavailableError,
    UnsupportedFormatError,
    ValidationError,
)

INGEST_SAMPLE_RATES = (8000, 16000, 22050, 44100, 48000)


@dataclass(frozen=True)
class VideoMetadata:
    video_id: str
    title: str
    description: str = ""
    duration_seconds: float = 0.0
    view_count: int = 0
    like_count: int = 0

    def __post_init__(self) -> None:
        if not self.video_id:
            raise ValidationError("video_id must be non-empty")
        if self.duration_seconds < 0:
            raise ValidationError("duration_seconds must be >= 0")
        if self.view_count < 0 or self.like_count < 0:
            raise ValidationError("engagement counts must be >= 0")

    def as_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "title": self.title,
            "description": self.description,
            "duration_seconds": self.duration_seconds,
            "view_count": self.view_count,
            "like_count": self.like_count,
        }


@dataclass(frozen=True, eq=False)
class AudioBuffer:
    """Mono PCM samples in [-1, 1] at a known rate."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self) -> None:
        if self.sample_rate_hz <= 0:
            raise ValidationError("sample_rate_hz must be positive")
        if self.samples.ndim != 1:
            raise ValidationError("AudioBuffer holds mono (1-D) samples")
        if self.samples.size:
            if not np.isfinite(self.samples).all():
                raise ValidationError("samples must be finite")
            if float(np.abs(self.samples).max()) > 1.0 + 1e-9:
                raise ValidationError("samples must lie in [-1.0, 1.0]")

    @property
    def duration_seconds(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def __len__(self) -> int:
        return self.samples.size


def load_metadata(source: str | Path | Mapping) -> VideoMetadata:
    """Parse a metadata document (path or already-decoded JSON object).

    Required keys: ``video_id``, ``title``.  Missing engagement counts
    default to 0; they are carried through reports but never scored.
    """
    if isinstance(source, Mapping):
        doc = source
    else:
        path = Path(source)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise NotFoundError(f"metadata document not found: {path}")
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise ParseError(f"metadata document is not valid JSON: {path}: {exc}")
    if not isinstance(doc, Mapping):
        raise ParseError("metadata document must be a JSON object")

    def text_field(name: str, required: bool) -> str:
        value = doc.get(name)
        if value is None:
            if required:
                raise ValidationError(f"metadata is missing required field '{name}'")
            return ""
        if not isinstance(value, str):
            raise ParseError(f"metadata field '{name}' must be a string")
        return value

    def number_field(name: str, integral: bool) -> float:
        value = doc.get(name, 0)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"metadata field '{name}' must be a number")
        if integral and int(value) != value:
            raise ParseError(f"metadata field '{name}' must be an integer")
        return value

    video_id = text_field("video_id", required=True)
    title = text_field("title", required=True)
    if not video_id:
        raise ValidationError("metadata is missing required field 'video_id'")
    if not title:
        raise ValidationError("metadata is missing required field 'title'")

    return VideoMetadata(
        video_id=video_id,
        title=title,
        description=text_field("description", required=False),
        duration_seconds=float(number_field("duration_seconds", integral=False)),
        view_count=int(number_field("view_count", integral=True)),
        like_count=int(number_field("like_count", integral=True)),
    )


_WAVE_FORMAT_PCM = 1
_WAVE_FORMAT_IEEE_FLOAT = 3


def load_audio(path: str | Path) -> AudioBuffer:
    """Read a RIFF/WAVE file into a mono buffer.

    Accepts 8-bit unsigned / 16-bit signed PCM and 32-bit IEEE float, one
    or two channels.  Stereo is downmixed by the per-sample mean; integer
    samples are scaled by the type's maximum magnitude so the most
    negative int16 maps exactly to -1.0.
    """
    path = Path(path)
    try:
        blob = path.read_bytes()
    except FileNotFoundError:
        raise NotFoundError(f"audio file not found: {path}")

    if len(blob) < 12 or blob[0:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise UnsupportedFormatError(f"not a RIFF/WAVE file: {path}")

    fmt = None
    data = None
    offset = 12
    while offset + 8 <= len(blob):
        chunk_id = blob[offset : offset + 4]
        (chunk_size,) = struct.unpack_from("<I", blob, offset + 4)
        body_start = offset + 8
        if chunk_id == b"fmt ":
            fmt = blob[body_start : body_start + chunk_size]
        elif chunk_id == b"data":
            if body_start + chunk_size > len(blob):
                raise CorruptFileError(
                    f"data chunk declares {chunk_size} bytes but file is truncated: {path}"
                )
            data = blob[body_start : body_start + chunk_size]
        offset = body_start + chunk_size + (chunk_size & 1)

    if fmt is None or len(fmt) < 16:
        raise CorruptFileError(f"missing or short fmt chunk: {path}")
    if data is None:
        raise CorruptFileError(f"missing data chunk: {path}")

    audio_format, channels, sample_rate, _, block_align, bits = struct.unpack_from(
        "<HHIIHH", fmt, 0
    )
    if audio_format not in (_WAVE_FORMAT_PCM, _WAVE_FORMAT_IEEE_FLOAT):
        raise UnsupportedFormatError(
            f"unsupported WAV codec {audio_format} (only PCM and IEEE float): {path}"
        )
    if channels not in (1, 2):
        raise UnsupportedFormatError(f"unsupported channel count {channels}: {path}")
    if sample_rate not in INGEST_SAMPLE_RATES:
        raise ValidationError(
            f"sample rate {sample_rate} not in accepted set {INGEST_SAMPLE_RATES}: {path}"
        )

    if audio_format == _WAVE_FORMAT_PCM and bits == 8:
        raw = np.frombuffer(data, dtype=np.uint8)
        samples = (raw.astype(np.float64) - 128.0) / 128.0
    elif audio_format == _WAVE_FORMAT_PCM and bits == 16:
        if len(data) % 2:
            raise CorruptFileError(f"data chunk size not sample-aligned: {path}")
        samples = np.frombuffer(data, dtype="<i2").astype(np.float64) / 32768.0
    elif audio_format == _WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        if len(data) % 4:
            raise CorruptFileError(f"data chunk size not sample-aligned: {path}")
        samples = np.frombuffer(data, dtype="<f4").astype(np.float64)
        if samples.size and not np.isfinite(samples).all():
            raise CorruptFileError(f"float WAV carries non-finite samples: {path}")
    else:
        raise UnsupportedFormatError(
            f"unsupported sample width {bits} bits for format {audio_format}: {path}"
        )

    if channels == 2:
        if samples.size % 2:
            raise CorruptFileError(f"stereo data chunk holds an odd sample count: {path}")
        samples = samples.reshape(-1, 2).mean(axis=1)

    samples = np.clip(samples, -1.0, 1.0)
    return AudioBuffer(samples=samples, sample_rate_hz=int(sample_rate))


class VideoSource(Protocol):
    """Adapter seam over whatever actually serves metadata + audio."""

    def fetch(self, video_id: str) -> tuple[VideoMetadata, AudioBuffer]: ...


@dataclass
class FixtureVideoSource:
    """Offline source: resolves ids against ``<root>/<id>.json`` + ``<root>/<id>.wav``."""

    root: Path

    def __post_init__(self) -> None:
        self.root = Path(self.root)

    def fetch(self, video_id: str) -> tuple[VideoMetadata, AudioBuffer]:
        if not self.root.is_dir():
            raise SourceUnavailableError(f"fixture directory not found: {self.root}")
        meta_path = self.root / f"{video_id}.json"
        wav_path = self.root / f"{video_id}.wav"
        if not meta_path.is_file() or not wav_path.is_file():
            raise NotFoundError(f"no fixture for video id '{video_id}' under {self.root}")
        return load_metadata(meta_path), load_audio(wav_path)


def fetch_video(video_id: str, source: VideoSource) -> tuple[VideoMetadata, AudioBuffer]:
    """Resolve a video id to the (metadata, audio) pair the pipeline consumes."""
    if not video_id:
        raise ValidationError("video_id must be non-empty")
    return source.fetch(video_id)
