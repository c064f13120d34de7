"""Pitch-scale modification: ESOLA time scaling followed by band-limited resampling."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioBuffer
from .epoch_marks import EpochMarks
from .errors import RatioOutOfRange, SignalTooShort
from .esola_core import TsmConfig, time_scale

RATIO_MIN = 0.25
RATIO_MAX = 4.0
_CHUNK = 8192


@dataclass(frozen=True)
class ResampleSpec:
    """Speed factor for :func:`resample`.

    ``ratio`` r reads the input at positions k * r, so the output has
    round(len / r) samples and, played at the original rate, every
    frequency is multiplied by r.
    """

    ratio: float
    filter_taps_per_phase: int = 32
    kaiser_beta: float = 8.6

    def __post_init__(self):
        if not RATIO_MIN <= self.ratio <= RATIO_MAX:
            raise RatioOutOfRange(f"ratio {self.ratio} outside [{RATIO_MIN}, {RATIO_MAX}]")
        if self.filter_taps_per_phase < 2:
            raise ValueError("filter_taps_per_phase must be >= 2")


def _kaiser(x: np.ndarray, beta: float) -> np.ndarray:
    """Continuous Kaiser window on [-1, 1], zero outside."""
    inside = np.abs(x) < 1.0
    arg = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    return np.where(inside, np.i0(beta * arg) / np.i0(beta), 0.0)


def resample(buffer: AudioBuffer, spec: ResampleSpec) -> AudioBuffer:
    """Kaiser-windowed sinc interpolation of the input at positions k * ratio.

    The sinc cutoff is min(1, 1/ratio) of Nyquist so downsampling does not
    alias; its support widens by the same factor to keep
    ``filter_taps_per_phase`` zero crossings under the window.
    """
    x = buffer.samples
    n_in = len(x)
    if n_in <= 2 * spec.filter_taps_per_phase:
        raise SignalTooShort(f"{n_in} samples is too short to resample")
    ratio = float(spec.ratio)
    cutoff = min(1.0, 1.0 / ratio)
    half_width = spec.filter_taps_per_phase / 2 / cutoff
    reach = int(np.ceil(half_width))
    n_out = int(round(n_in / ratio))

    padded = np.concatenate([np.zeros(reach), x, np.zeros(reach + 1)])
    offsets = np.arange(-reach + 1, reach + 1)
    out = np.empty(n_out)
    for c0 in range(0, n_out, _CHUNK):
        t = np.arange(c0, min(c0 + _CHUNK, n_out)) * ratio
        base = np.floor(t).astype(np.int64)
        taps = base[:, None] + offsets[None, :]
        dist = t[:, None] - taps
        w = cutoff * np.sinc(cutoff * dist) * _kaiser(dist / half_width, spec.kaiser_beta)
        out[c0:c0 + len(t)] = np.sum(w * padded[taps + reach], axis=1)
    return buffer.with_samples(out)


def pitch_scale(buffer: AudioBuffer, marks: EpochMarks, beta: float,
                cfg: TsmConfig = TsmConfig(), spec: ResampleSpec | None = None) -> AudioBuffer:
    """Multiply pitch by ``beta`` and keep the duration.

    Stretch the duration by beta with ESOLA, then resample with speed
    factor beta: lengths cancel and frequencies scale by beta.
    """
    stretched, _ = time_scale(buffer, marks, beta, cfg)
    if spec is None:
        spec = ResampleSpec(beta)
    elif spec.ratio != beta:
        spec = ResampleSpec(beta, spec.filter_taps_per_phase, spec.kaiser_beta)
    return resample(stretched, spec)
