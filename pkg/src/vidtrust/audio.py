"""Audio standardization, 30-second chunking, and log-Mel features.

The feature parameters follow the convention of the ASR model family the
pipeline's transcription backend hosts: 16 kHz input, 80 mel filters over
0-8000 Hz, 400-sample Hann window, 160-sample hop, log10 energies clamped
at (max - 8) and affinely mapped by (x + 4) / 4.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import ContractError, CorruptFileError
from .ingest import AudioBuffer

TARGET_RATE = 16000
CHUNK_SECONDS = 30
CHUNK_SAMPLES = TARGET_RATE * CHUNK_SECONDS  # 480000

N_MELS = 80
WINDOW_SAMPLES = 400
HOP_SAMPLES = 160
FFT_SIZE = 400
MEL_FMAX = 8000.0

_LOG_FLOOR = 1e-10
_DYNAMIC_RANGE = 8.0

_KAISER_BETA = 8.6
_TAPS_PER_PHASE = 64
_HALF = _TAPS_PER_PHASE // 2  # kernel reaches 32 input samples each side


@dataclass(frozen=True, eq=False)
class AudioChunk:
    """Exactly 30 s of 16 kHz mono audio, zero-padded at the tail."""

    index: int
    samples: np.ndarray

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ContractError("chunk index must be >= 0")
        if self.samples.shape != (CHUNK_SAMPLES,):
            raise ContractError(
                f"chunk must hold exactly {CHUNK_SAMPLES} samples, got {self.samples.shape}"
            )

    @property
    def start_offset_seconds(self) -> float:
        return self.index * float(CHUNK_SECONDS)


@dataclass(frozen=True, eq=False)
class MelSpectrogram:
    """frames x n_mels matrix of scaled log energies."""

    values: np.ndarray
    n_mels: int = N_MELS
    hop_samples: int = HOP_SAMPLES
    window_samples: int = WINDOW_SAMPLES
    fft_size: int = FFT_SIZE

    @property
    def frames(self) -> int:
        return self.values.shape[0]


def _kaiser(t: np.ndarray, half_width: float) -> np.ndarray:
    inside = np.abs(t) <= half_width
    arg = np.zeros_like(t)
    arg[inside] = np.sqrt(1.0 - (t[inside] / half_width) ** 2)
    return np.where(inside, np.i0(_KAISER_BETA * arg) / np.i0(_KAISER_BETA), 0.0)


@lru_cache(maxsize=16)
def _polyphase_table(up: int, down: int) -> np.ndarray:
    """Windowed-sinc filter bank: one row of 64 taps per output phase.

    Cutoff sits at the lower of the two Nyquist frequencies; each phase is
    normalized to unit DC gain so pure level is preserved exactly.
    """
    cutoff = min(1.0, up / down)
    table = np.empty((up, _TAPS_PER_PHASE), dtype=np.float64)
    offsets = np.arange(_TAPS_PER_PHASE) - (_HALF - 1)  # -31 .. 32
    for q in range(up):
        t = q / up - offsets
        taps = cutoff * np.sinc(cutoff * t) * _kaiser(t, float(_HALF))
        table[q] = taps / taps.sum()
    return table


def _resample(samples: np.ndarray, from_rate: int, to_rate: int) -> np.ndarray:
    g = int(np.gcd(from_rate, to_rate))
    up, down = to_rate // g, from_rate // g
    table = _polyphase_table(up, down)

    out_len = -((-samples.size * up) // down)  # ceil
    padded = np.concatenate(
        [np.zeros(_HALF - 1), samples, np.zeros(_HALF + down // up + 1)]
    )
    out = np.empty(out_len, dtype=np.float64)
    block = 1 << 15
    tap_range = np.arange(_TAPS_PER_PHASE)
    for start in range(0, out_len, block):
        n = np.arange(start, min(start + block, out_len), dtype=np.int64)
        pos = n * down
        i0 = pos // up
        phase = pos - i0 * up
        windows = padded[i0[:, None] + tap_range[None, :]]
        out[start : start + n.size] = np.einsum("bt,bt->b", table[phase], windows)
    return out


def standardize(buffer: AudioBuffer) -> AudioBuffer:
    """Resample to exactly 16 kHz; a 16 kHz input is returned unchanged.

    Duration is preserved to within one output sample.  Sinc ringing on
    near-full-scale content is clipped back into [-1, 1].
    """
    if buffer.sample_rate_hz == TARGET_RATE:
        return buffer
    if buffer.samples.size == 0:
        return AudioBuffer(samples=np.zeros(0), sample_rate_hz=TARGET_RATE)
    resampled = _resample(buffer.samples, buffer.sample_rate_hz, TARGET_RATE)
    return AudioBuffer(samples=np.clip(resampled, -1.0, 1.0), sample_rate_hz=TARGET_RATE)


def chunk(buffer: AudioBuffer) -> list[AudioChunk]:
    """Split a standardized buffer into contiguous 30 s chunks.

    The final chunk is zero-padded; concatenating all chunks and trimming
    the padding reconstructs the input exactly.  Empty input yields no
    chunks.
    """
    if buffer.sample_rate_hz != TARGET_RATE:
        raise ContractError(
            f"chunking expects {TARGET_RATE} Hz audio, got {buffer.sample_rate_hz}"
        )
    n = buffer.samples.size
    if n == 0:
        return []
    count = -((-n) // CHUNK_SAMPLES)
    chunks = []
    for k in range(count):
        piece = buffer.samples[k * CHUNK_SAMPLES : (k + 1) * CHUNK_SAMPLES]
        if piece.size < CHUNK_SAMPLES:
            piece = np.concatenate([piece, np.zeros(CHUNK_SAMPLES - piece.size)])
        chunks.append(AudioChunk(index=k, samples=piece))
    return chunks


def hz_to_mel(hz: float | np.ndarray) -> float | np.ndarray:
    return 2595.0 * np.log10(1.0 + np.asarray(hz, dtype=np.float64) / 700.0)


def mel_to_hz(mel: float | np.ndarray) -> float | np.ndarray:
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def mel_filter_centers_hz(n_mels: int = N_MELS, fmax: float = MEL_FMAX) -> np.ndarray:
    """Center frequencies of the triangular filters, evenly spaced in mel."""
    return mel_to_hz(np.linspace(0.0, float(hz_to_mel(fmax)), n_mels))


@lru_cache(maxsize=4)
def _mel_filterbank(n_mels: int = N_MELS) -> np.ndarray:
    """(n_mels, fft_bins) triangular filters, symmetric in mel space.

    Centers run from 0 to mel(8 kHz) inclusive with unit peak height, so
    every FFT bin up to 8 kHz falls under at least one filter and every
    filter covers at least one bin.
    """
    centers = np.linspace(0.0, float(hz_to_mel(MEL_FMAX)), n_mels)
    step = centers[1] - centers[0]
    bin_hz = np.arange(FFT_SIZE // 2 + 1) * (TARGET_RATE / FFT_SIZE)
    bin_mel = hz_to_mel(bin_hz)
    weights = 1.0 - np.abs(bin_mel[None, :] - centers[:, None]) / step
    return np.maximum(weights, 0.0)


def log_mel(c: AudioChunk) -> MelSpectrogram:
    """Log-Mel spectrogram of one chunk: exactly 3000 frames of 80 mels.

    Frames start at multiples of the hop with no reflection padding; the
    400-sample window runs past the chunk tail into zeros.  Energies are
    floored at 1e-10 before the log, clamped below at the per-chunk
    maximum minus 8, then mapped by (x + 4) / 4.
    """
    frames = CHUNK_SAMPLES // HOP_SAMPLES
    padded = np.concatenate([c.samples, np.zeros(WINDOW_SAMPLES - HOP_SAMPLES)])
    windows = np.lib.stride_tricks.sliding_window_view(padded, WINDOW_SAMPLES)[
        ::HOP_SAMPLES
    ][:frames]
    hann = 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(WINDOW_SAMPLES) / WINDOW_SAMPLES))
    spectrum = np.fft.rfft(windows * hann, n=FFT_SIZE, axis=1)
    power = np.abs(spectrum) ** 2
    mel_power = power @ _mel_filterbank().T
    log_spec = np.log10(np.maximum(mel_power, _LOG_FLOOR))
    log_spec = np.maximum(log_spec, log_spec.max() - _DYNAMIC_RANGE)
    scaled = (log_spec + 4.0) / 4.0
    return MelSpectrogram(values=scaled.astype(np.float32))


_MEL_MAGIC = b"MEL1"


def write_mel(path: str | Path, spec: MelSpectrogram) -> None:
    """Dump a spectrogram: 12-byte header (frames, mels, magic), then
    row-major little-endian 32-bit floats."""
    header = struct.pack("<II4s", spec.values.shape[0], spec.values.shape[1], _MEL_MAGIC)
    body = np.ascontiguousarray(spec.values, dtype="<f4").tobytes()
    Path(path).write_bytes(header + body)


def read_mel(path: str | Path) -> MelSpectrogram:
    blob = Path(path).read_bytes()
    if len(blob) < 12:
        raise CorruptFileError(f"mel dump too short: {path}")
    frames, mels, magic = struct.unpack_from("<II4s", blob, 0)
    if magic != _MEL_MAGIC:
        raise CorruptFileError(f"bad mel dump magic {magic!r}: {path}")
    expected = 12 + frames * mels * 4
    if len(blob) != expected:
        raise CorruptFileError(f"mel dump size mismatch ({len(blob)} != {expected}): {path}")
    values = np.frombuffer(blob, dtype="<f4", offset=12).reshape(frames, mels)
    return MelSpectrogram(values=values, n_mels=mels)
