"""Objective measurements: F0 tracking, duration error, spectrogram export."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .audio_io import AudioBuffer
from .errors import IoFailure, SignalTooShort

DB_FLOOR = -120.0
# a peak at a shorter lag wins if it reaches this fraction of the best peak;
# keeps multiples of the period from being reported for clean periodic input
OCTAVE_TOLERANCE = 0.9


@dataclass
class F0Track:
    frame_times: np.ndarray
    f0_hz: np.ndarray
    voicing_strength: np.ndarray

    def __len__(self) -> int:
        return len(self.f0_hz)

    @property
    def voiced(self) -> np.ndarray:
        return self.f0_hz > 0

    def to_csv(self) -> str:
        lines = ["time_s,f0_hz,voicing"]
        lines += [f"{t:.6f},{f:.4f},{v:.4f}"
                  for t, f, v in zip(self.frame_times, self.f0_hz, self.voicing_strength)]
        return "\n".join(lines) + "\n"


def _frames(x: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    if len(x) < frame_len:
        raise SignalTooShort(f"{len(x)} samples is shorter than one {frame_len}-sample frame")
    return sliding_window_view(x, frame_len)[::hop]


def _nccf(frames: np.ndarray, width: int, max_lag: int) -> np.ndarray:
    """Normalized cross-correlation of each frame's first ``width`` samples
    with the same-length segment starting at every lag in [0, max_lag]."""
    n_frames, frame_len = frames.shape
    nfft = 1 << int(np.ceil(np.log2(frame_len + width)))
    head = np.fft.rfft(frames[:, :width], nfft)
    whole = np.fft.rfft(frames, nfft)
    num = np.fft.irfft(np.conj(head) * whole, nfft)[:, :max_lag + 1]
    csq = np.concatenate([np.zeros((n_frames, 1)), np.cumsum(frames ** 2, axis=1)], axis=1)
    lags = np.arange(max_lag + 1)
    e_lag = csq[:, lags + width] - csq[:, lags]
    e_head = csq[:, [width]]
    denom = np.sqrt(e_head * e_lag)
    out = np.zeros_like(num)
    ok = denom > 1e-12 * max(1.0, float(np.max(e_head, initial=0.0)))
    out[ok] = num[ok] / denom[ok]
    return np.clip(out, -1.0, 1.0)


def estimate_f0_track(buffer: AudioBuffer, frame_ms: float = 40.0, hop_ms: float = 10.0,
                      f0_min: float = 60.0, f0_max: float = 400.0,
                      voicing_threshold: float = 0.5) -> F0Track:
    """Frame-wise F0 from the peak of the normalized autocorrelation.

    The peak lag is refined by parabolic interpolation. Frames whose peak
    correlation is below ``voicing_threshold`` report 0 Hz.
    """
    fs = buffer.sample_rate
    frame_len = int(round(frame_ms * 1e-3 * fs))
    hop = max(1, int(round(hop_ms * 1e-3 * fs)))
    lag_lo = max(2, int(np.ceil(fs / f0_max)))
    lag_hi = int(np.floor(fs / f0_min))
    width = frame_len - lag_hi - 1
    if width < lag_lo:
        raise ValueError("frame too short for the requested f0 range")

    frames = _frames(buffer.samples, frame_len, hop)
    frames = frames - frames.mean(axis=1, keepdims=True)
    r = _nccf(frames, width, lag_hi + 1)

    lags = np.arange(lag_lo, lag_hi + 1)
    mid = r[:, lags]
    is_peak = (mid >= r[:, lags - 1]) & (mid > r[:, lags + 1])
    peaks = np.where(is_peak, mid, -np.inf)
    best = peaks.max(axis=1)

    n_frames = len(frames)
    f0 = np.zeros(n_frames)
    strength = np.clip(np.where(np.isfinite(best), best, 0.0), 0.0, 1.0)
    for i in np.flatnonzero(best >= voicing_threshold):
        cand = np.flatnonzero(peaks[i] >= OCTAVE_TOLERANCE * best[i])
        lag = int(lags[cand[0]])
        a, b, c = r[i, lag - 1], r[i, lag], r[i, lag + 1]
        curv = a - 2 * b + c
        delta = 0.5 * (a - c) / curv if curv < 0 else 0.0
        refined = np.clip(lag + delta, fs / f0_max, fs / f0_min)
        f0[i] = fs / refined
        strength[i] = b
    times = (np.arange(n_frames) * hop + frame_len / 2) / fs
    return F0Track(times, f0, strength)


def mean_f0(track: F0Track) -> float:
    """Mean over voiced frames; 0 when no frame is voiced."""
    voiced = track.f0_hz[track.f0_hz > 0]
    return float(voiced.mean()) if voiced.size else 0.0


def f0_deviation_pct(output: AudioBuffer, reference_hz: float, **kwargs) -> float:
    """|mean F0(output) - reference| as a percentage of the reference."""
    return 100.0 * abs(mean_f0(estimate_f0_track(output, **kwargs)) - reference_hz) / reference_hz


def duration_error(output_len: int, input_len: int, alpha: float) -> int:
    return int(output_len) - int(round(alpha * input_len))


def spectrogram(buffer: AudioBuffer, frame_ms: float = 25.0,
                hop_ms: float = 10.0) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hann-windowed STFT magnitude in dB, clamped at -120 dB.

    Returns (frame times, bin frequencies, magnitude[frame, bin]). A
    full-scale sine at a bin centre reads about 0 dB.
    """
    fs = buffer.sample_rate
    frame_len = int(round(frame_ms * 1e-3 * fs))
    hop = max(1, int(round(hop_ms * 1e-3 * fs)))
    frames = _frames(buffer.samples, frame_len, hop)
    win = np.hanning(frame_len)
    mag = np.abs(np.fft.rfft(frames * win, axis=1)) * (2.0 / win.sum())
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag)
    db = np.maximum(db, DB_FLOOR)
    times = (np.arange(len(frames)) * hop + frame_len / 2) / fs
    freqs = np.fft.rfftfreq(frame_len, 1.0 / fs)
    return times, freqs, db


def spectrogram_csv(buffer: AudioBuffer, path, frame_ms: float = 25.0,
                    hop_ms: float = 10.0) -> None:
    """Write ``time_s,freq_hz,magnitude_db`` rows, time-major."""
    times, freqs, db = spectrogram(buffer, frame_ms, hop_ms)
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["time_s", "freq_hz", "magnitude_db"])
            for t, row in zip(times, db):
                w.writerows((f"{t:.6f}", f"{f:.3f}", f"{m:.3f}") for f, m in zip(freqs, row))
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
