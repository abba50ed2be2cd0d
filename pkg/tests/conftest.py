"""Shared fixtures: WAV generation, an offline fixture video, and a
deterministic synthetic Sinhala hate-speech corpus."""

from __future__ import annotations

import json
import random
import struct
from pathlib import Path

import numpy as np
import pytest


def write_wav(
    path: Path,
    samples: np.ndarray,
    sample_rate: int,
    fmt: str = "int16",
    truncate_data_bytes: int | None = None,
) -> Path:
    """Write a RIFF/WAVE file byte by byte (independent of the package's reader).

    ``samples`` is float in [-1, 1]; 1-D mono or (n, 2) stereo.
    ``truncate_data_bytes`` chops the file after the data header for
    corrupt-file tests.
    """
    arr = np.asarray(samples, dtype=np.float64)
    channels = 1 if arr.ndim == 1 else arr.shape[1]
    interleaved = arr.reshape(-1)

    if fmt == "int16":
        audio_format, bits = 1, 16
        payload = np.clip(np.round(interleaved * 32768.0), -32768, 32767).astype("<i2").tobytes()
    elif fmt == "uint8":
        audio_format, bits = 1, 8
        payload = np.clip(np.round(interleaved * 128.0 + 128.0), 0, 255).astype(np.uint8).tobytes()
    elif fmt == "float32":
        audio_format, bits = 3, 32
        payload = interleaved.astype("<f4").tobytes()
    else:
        raise ValueError(f"unknown test wav format {fmt}")

    block_align = channels * bits // 8
    byte_rate = sample_rate * block_align
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    fmt_chunk = b"fmt " + struct.pack(
        "<IHHIIHH", 16, audio_format, channels, sample_rate, byte_rate, block_align, bits
    )
    data_header = b"data" + struct.pack("<I", len(payload))
    blob = header + fmt_chunk + data_header + payload
    if truncate_data_bytes is not None:
        keep = len(header) + len(fmt_chunk) + len(data_header) + truncate_data_bytes
        blob = blob[:keep]
    path.write_bytes(blob)
    return path


@pytest.fixture
def wav_writer(tmp_path):
    def make(name: str, samples, sample_rate, fmt="int16", truncate_data_bytes=None) -> Path:
        return write_wav(tmp_path / name, np.asarray(samples), sample_rate, fmt,
                         truncate_data_bytes)

    return make


def _fixture_signal(duration_s: float, rate: int) -> np.ndarray:
    t = np.arange(int(duration_s * rate)) / rate
    rng = np.random.default_rng(2024)
    tone = 0.3 * np.sin(2 * np.pi * 220.0 * t) + 0.2 * np.sin(2 * np.pi * 907.0 * t)
    return tone + 0.05 * rng.standard_normal(t.size)


@pytest.fixture(scope="session")
def fixture_video_dir(tmp_path_factory) -> Path:
    """An offline fixture directory holding video 'vid001' (3 s @ 44.1 kHz)."""
    root = tmp_path_factory.mktemp("fixtures")
    meta = {
        "video_id": "vid001",
        "title": "කොළඹ ප්‍රවෘත්ති විකාශය",
        "description": "අද දවසේ ප්‍රධාන සිදුවීම් සාරාංශය",
        "duration_seconds": 3.0,
        "view_count": 1200,
        "like_count": 85,
    }
    (root / "vid001.json").write_text(json.dumps(meta, ensure_ascii=False), encoding="utf-8")
    write_wav(root / "vid001.wav", _fixture_signal(3.0, 44100), 44100, "int16")
    return root


_SINHALA_NEUTRAL = [
    "පාසල", "ගුරුවරයා", "පන්තිය", "ගඟ", "වතුර", "ගම", "නගරය", "පොත", "කවිය",
    "සංගීතය", "ක්‍රීඩාව", "වෙළඳපොල", "අධ්‍යාපනය", "සෞඛ්‍යය", "ගොවිතැන", "වැස්ස",
    "හිරු", "සඳ", "මුහුද", "කඳුකරය", "දුම්රිය", "බස්රථය", "රූපවාහිනිය", "පුවත්පත",
    "ආර්ථිකය", "සංවර්ධනය", "යටිතල", "පහසුකම්", "ජනතාව", "රජය",
]

_SINHALA_HATE = [
    "මෝඩයා", "වලත්තයා", "පහත්", "නින්දිත", "කැත", "ජාතිවාදී", "වෛරී", "පලයන්",
    "නසන්න", "පහර", "දෙමු", "විනාශ", "කරමු", "එළවමු", "නරුම", "කුණු", "බොරුකාර",
    "වංචාකාර", "දුෂ්ට", "පාදඩ", "අසභ්‍ය", "නීච", "ගල්", "ගහමු", "තලමු",
]

_SINHALA_SHARED = ["අපි", "ඔවුන්", "මේ", "ඒ", "හැම", "දවසම", "ගැන", "කතා", "කරයි", "වගේ"]


def build_sinhala_corpus(path: Path, sentences: int = 6200, seed: int = 7) -> Path:
    """Deterministic labeled corpus: hate and neutral sentences draw from
    disjoint word pools plus shared filler, so a trigram model can learn it."""
    rng = random.Random(seed)
    lines = []
    for _ in range(sentences):
        label = 1 if rng.random() < 0.48 else 0
        pool = _SINHALA_HATE if label == 1 else _SINHALA_NEUTRAL
        length = rng.randint(4, 9)
        words = [
            rng.choice(pool if rng.random() < 0.8 else _SINHALA_SHARED)
            for _ in range(length)
        ]
        lines.append(f"{label}\t{' '.join(words)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def sinhala_corpus_path(tmp_path_factory) -> Path:
    return build_sinhala_corpus(tmp_path_factory.mktemp("corpus") / "hate_corpus.tsv")
