"""16-bit PCM WAV input/output and the in-memory audio buffer."""
from __future__ import annotations

import struct
import wave
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyAudio, IoFailure, MalformedContainer, UnsupportedFormat

PCM_SCALE = 32768.0
WAVE_FORMAT_PCM = 0x0001


@dataclass
class AudioBuffer:
    """Mono signal with its sampling rate.

    Samples are float64. Buffers decoded from 16-bit PCM hold values
    ``word / 32768`` and therefore lie in [-1, 1]; processed buffers are
    only required to be finite.
    """

    samples: np.ndarray
    sample_rate: int
    source_bit_depth: int = field(default=16)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64).reshape(-1)
        self.sample_rate = int(self.sample_rate)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must be finite")

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    def with_samples(self, samples: np.ndarray) -> "AudioBuffer":
        return AudioBuffer(samples, self.sample_rate, self.source_bit_depth)


def to_pcm16(samples: np.ndarray) -> np.ndarray:
    """Quantize real samples to int16 words: clamp(round(x * 32768))."""
    words = np.round(np.asarray(samples, dtype=np.float64) * PCM_SCALE)
    return np.clip(words, -32768, 32767).astype(np.int16)


def from_pcm16(words: np.ndarray) -> np.ndarray:
    return np.asarray(words, dtype=np.int16).astype(np.float64) / PCM_SCALE


def _iter_chunks(blob: bytes):
    pos = 12
    while pos + 8 <= len(blob):
        chunk_id = blob[pos:pos + 4]
        (size,) = struct.unpack_from("<I", blob, pos + 4)
        start = pos + 8
        if start + size > len(blob):
            raise MalformedContainer(
                f"chunk {chunk_id!r} declares {size} bytes, only {len(blob) - start} present")
        yield chunk_id, blob[start:start + size]
        # chunks are word aligned
        pos = start + size + (size & 1)


def read_wav(path) -> AudioBuffer:
    """Read a 16-bit PCM WAV file into a mono :class:`AudioBuffer`.

    Stereo input is averaged to mono. Chunks other than ``fmt `` and
    ``data`` are skipped.
    """
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc

    if len(blob) < 12 or blob[:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise MalformedContainer(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    for chunk_id, payload in _iter_chunks(blob):
        if chunk_id == b"fmt ":
            if len(payload) < 16:
                raise MalformedContainer(f"{path}: fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", payload)
        elif chunk_id == b"data" and data is None:
            data = payload
    if fmt is None or data is None:
        raise MalformedContainer(f"{path}: missing fmt or data chunk")

    format_tag, channels, rate, _, block_align, bits = fmt
    if format_tag != WAVE_FORMAT_PCM:
        raise UnsupportedFormat(f"{path}: format code {format_tag:#06x} is not PCM")
    if bits != 16:
        raise UnsupportedFormat(f"{path}: {bits}-bit samples, only 16-bit supported")
    if channels not in (1, 2):
        raise UnsupportedFormat(f"{path}: {channels} channels, expected 1 or 2")
    if rate == 0:
        raise MalformedContainer(f"{path}: zero sample rate")
    if block_align != 2 * channels or len(data) % block_align:
        raise MalformedContainer(f"{path}: data size does not match block alignment")
    if not data:
        raise EmptyAudio(f"{path}: no samples")

    words = np.frombuffer(data, dtype="<i2").reshape(-1, channels)
    if channels == 1:
        samples = from_pcm16(words[:, 0])
    else:
        samples = words.astype(np.float64).mean(axis=1) / PCM_SCALE
    return AudioBuffer(samples, rate)


def write_wav(buffer: AudioBuffer, path) -> None:
    """Write ``buffer`` as a 16-bit PCM mono WAV file."""
    if len(buffer) == 0:
        raise EmptyAudio("refusing to write an empty buffer")
    words = to_pcm16(buffer.samples)
    try:
        with open(path, "wb") as raw, wave.open(raw, "wb") as fh:
            fh.setnchannels(1)
            fh.setsampwidth(2)
            fh.setframerate(buffer.sample_rate)
            fh.writeframes(words.astype("<i2").tobytes())
    except (OSError, wave.Error) as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
