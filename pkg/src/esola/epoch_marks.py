"""Epoch locations: container, LSB embedding in 16-bit audio, sidecar text files."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio_io import AudioBuffer, from_pcm16, to_pcm16
from .errors import IoFailure, LengthMismatch, MalformedMarksFile, RateMismatch

MARKS_MAGIC = "ESOLA-EPOCHS"
MARKS_VERSION = "v1"


@dataclass
class EpochMarks:
    """Strictly increasing sample indices of glottal closure instants."""

    indices: np.ndarray
    signal_length: int
    sample_rate: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        self.indices = idx
        self.signal_length = int(self.signal_length)
        self.sample_rate = int(self.sample_rate)
        if idx.size:
            if idx[0] < 0 or idx[-1] >= self.signal_length:
                raise ValueError("epoch index outside [0, signal_length)")
            if np.any(np.diff(idx) <= 0):
                raise ValueError("epoch indices must be strictly increasing")

    def __len__(self) -> int:
        return self.indices.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, EpochMarks):
            return NotImplemented
        return (self.signal_length == other.signal_length
                and self.sample_rate == other.sample_rate
                and np.array_equal(self.indices, other.indices))

    def mean_interval(self) -> float:
        """Mean spacing between consecutive epochs in samples (0 if fewer than two)."""
        if len(self) < 2:
            return 0.0
        return float(np.mean(np.diff(self.indices)))


def embed_lsb(buffer: AudioBuffer, marks: EpochMarks) -> AudioBuffer:
    """Code epoch presence into the least significant bit of every 16-bit word.

    The LSB is set at epoch indices and cleared everywhere else.
    """
    if marks.signal_length != len(buffer):
        raise LengthMismatch(
            f"marks refer to {marks.signal_length} samples, buffer has {len(buffer)}")
    if marks.sample_rate != buffer.sample_rate:
        raise RateMismatch(
            f"marks at {marks.sample_rate} Hz, buffer at {buffer.sample_rate} Hz")
    words = to_pcm16(buffer.samples)
    words &= np.int16(~1)
    words[marks.indices] |= np.int16(1)
    return buffer.with_samples(from_pcm16(words))


def extract_lsb(buffer: AudioBuffer) -> EpochMarks:
    """Read epoch marks back from the word LSBs.

    There is no in-band flag saying a file was marked; on unmarked audio
    this returns roughly every other sample.
    """
    words = to_pcm16(buffer.samples)
    indices = np.flatnonzero(words & 1)
    return EpochMarks(indices, len(buffer), buffer.sample_rate)


def format_marks(marks: EpochMarks) -> str:
    lines = [f"{MARKS_MAGIC} {MARKS_VERSION} {marks.sample_rate} {marks.signal_length}"]
    lines.extend(str(int(i)) for i in marks.indices)
    return "\n".join(lines) + "\n"


def parse_marks(text: str) -> EpochMarks:
    lines = text.splitlines()
    if not lines:
        raise MalformedMarksFile("empty marks file")
    header = lines[0].split()
    if len(header) != 4 or header[0] != MARKS_MAGIC or header[1] != MARKS_VERSION:
        raise MalformedMarksFile(f"bad header: {lines[0]!r}")
    try:
        rate, length = int(header[2]), int(header[3])
        indices = [int(line) for line in lines[1:] if line.strip()]
    except ValueError as exc:
        raise MalformedMarksFile(str(exc)) from exc
    if rate <= 0 or length < 0:
        raise MalformedMarksFile(f"bad header values: {lines[0]!r}")
    try:
        return EpochMarks(np.array(indices, dtype=np.int64), length, rate)
    except ValueError as exc:
        raise MalformedMarksFile(str(exc)) from exc


def write_marks_file(marks: EpochMarks, path) -> None:
    try:
        Path(path).write_text(format_marks(marks), encoding="utf-8", newline="\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_marks_file(path) -> EpochMarks:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return parse_marks(text)
