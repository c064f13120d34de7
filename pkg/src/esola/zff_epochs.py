"""Epoch (glottal closure instant) extraction by zero-frequency filtering.

Pipeline: first difference, two cascaded zero-frequency resonators,
repeated local-mean subtraction, positive zero crossings.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.fft
from numba import njit

from .audio_io import AudioBuffer
from .epoch_marks import EpochMarks
from .errors import NoPeriodicityFound, SignalTooShort, WindowTooLarge

log = logging.getLogger(__name__)

# normalized autocorrelation below this means "no usable periodicity"
PERIODICITY_THRESHOLD = 0.1
FALLBACK_F0_HZ = 200.0
# the zero-frequency signal has negligible content above a quarter of Nyquist
BOOTSTRAP_DECIMATION = 4
OCTAVE_TOLERANCE = 0.9


@dataclass(frozen=True)
class ZffConfig:
    window_factor: float = 1.5
    trend_iterations: int = 3
    f0_search_min_hz: float = 66.0
    f0_search_max_hz: float = 400.0
    avg_pitch_period_samples: Optional[int] = None

    def __post_init__(self):
        if not 1.0 <= self.window_factor <= 2.0:
            raise ValueError("window_factor must lie in [1, 2]")
        if self.trend_iterations < 1:
            raise ValueError("trend_iterations must be >= 1")
        if not 0 < self.f0_search_min_hz < self.f0_search_max_hz:
            raise ValueError("need 0 < f0_search_min_hz < f0_search_max_hz")
        if self.avg_pitch_period_samples is not None and self.avg_pitch_period_samples < 1:
            raise ValueError("avg_pitch_period_samples must be positive")


def preprocess_diff(signal) -> np.ndarray:
    """x[n] = s[n] - s[n-1], with x[0] = s[0]."""
    s = np.asarray(signal, dtype=np.float64)
    if s.shape[0] < 2:
        raise SignalTooShort("need at least 2 samples")
    out = np.empty_like(s)
    out[0] = s[0]
    np.subtract(s[1:], s[:-1], out=out[1:])
    return out


@njit(cache=True)
def _resonate_twice(x):
    y = np.empty_like(x)
    y1 = y1_prev = y2 = y2_prev = 0.0
    for i in range(x.shape[0]):
        v = 2.0 * y1 - y1_prev + x[i]
        y1_prev = y1
        y1 = v
        w = 2.0 * y2 - y2_prev + v
        y2_prev = y2
        y2 = w
        y[i] = w
    return y


def zero_freq_resonate(signal) -> np.ndarray:
    """Two cascaded resonators y[n] = 2y[n-1] - y[n-2] + x[n] (double pole at z = 1).

    Zero initial state, float64 throughout. The output grows polynomially;
    :func:`remove_trend` takes that back out.
    """
    x = np.ascontiguousarray(signal, dtype=np.float64)
    if x.shape[0] == 0:
        raise SignalTooShort("empty signal")
    return _resonate_twice(x)


def _acf_period(signal, sample_rate: float, cfg: ZffConfig) -> float:
    s = np.asarray(signal, dtype=np.float64)
    n = s.shape[0]
    if n <= 2 * sample_rate / cfg.f0_search_min_hz:
        raise SignalTooShort(
            f"{n} samples is too short for a {cfg.f0_search_min_hz} Hz period search")
    lag_lo = max(1, int(np.ceil(sample_rate / cfg.f0_search_max_hz)))
    lag_hi = int(np.floor(sample_rate / cfg.f0_search_min_hz))

    s = s - s.mean()
    # linear (not circular) correlation is only needed up to lag_hi + 1
    nfft = scipy.fft.next_fast_len(n + lag_hi + 2, real=True)
    spec = scipy.fft.rfft(s, nfft)
    acf = scipy.fft.irfft(spec.real ** 2 + spec.imag ** 2, nfft)[: lag_hi + 2]
    if acf[0] <= 0:
        raise NoPeriodicityFound("signal has no energy")
    acf = acf / acf[0]

    lags = np.arange(lag_lo, lag_hi + 1)
    is_peak = (acf[lags] >= acf[lags - 1]) & (acf[lags] >= acf[lags + 1])
    if not np.any(is_peak):
        raise NoPeriodicityFound("no autocorrelation peak in the pitch range")
    peak_lags = lags[is_peak]
    best = float(np.max(acf[peak_lags]))
    if best < PERIODICITY_THRESHOLD:
        raise NoPeriodicityFound(
            f"autocorrelation peak {best:.3f} below {PERIODICITY_THRESHOLD}")
    lag = int(peak_lags[np.argmax(acf[peak_lags] >= OCTAVE_TOLERANCE * best)])
    a, b, c = acf[lag - 1], acf[lag], acf[lag + 1]
    curv = a - 2 * b + c
    return lag + (0.5 * (a - c) / curv if curv < 0 else 0.0)


def estimate_avg_pitch_period(signal, sample_rate: int, cfg: ZffConfig = ZffConfig()) -> int:
    """Average pitch period in samples from the global autocorrelation.

    The lag search covers [fs/f0_max, fs/f0_min]; only local maxima of the
    normalized (biased) autocorrelation are candidates, so a monotonically
    decaying autocorrelation does not report a band edge. A peak at a
    shorter lag is preferred when it reaches 90% of the highest one, since
    multiples of the period correlate about as well as the period itself.
    """
    if cfg.avg_pitch_period_samples is not None:
        return int(cfg.avg_pitch_period_samples)
    return int(round(_acf_period(signal, sample_rate, cfg)))


@njit(cache=True)
def _remove_trend(y, half_window, iterations):
    n = y.shape[0]
    hw = half_window
    src = y.copy()
    dst = np.empty(n)
    inv_full = 1.0 / (2 * hw + 1)
    for _ in range(iterations):
        # running sum over src[i - hw .. i + hw], truncated at the edges
        acc = 0.0
        for j in range(hw):
            acc += src[j]
        for i in range(hw + 1):
            acc += src[i + hw]
            dst[i] = src[i] - acc / (i + hw + 1)
        for i in range(hw + 1, n - hw):
            acc += src[i + hw] - src[i - hw - 1]
            dst[i] = src[i] - acc * inv_full
        for i in range(max(n - hw, hw + 1), n):
            acc -= src[i - hw - 1]
            dst[i] = src[i] - acc / (n - i + hw)
        src, dst = dst, src
    return src


def remove_trend(signal, half_window: int, iterations: int) -> np.ndarray:
    """Subtract the local mean over 2*half_window + 1 samples, ``iterations`` times.

    Near the edges the window is truncated to the available samples.
    """
    y = np.ascontiguousarray(signal, dtype=np.float64)
    if half_window < 1:
        raise ValueError("half_window must be positive")
    if iterations < 1:
        raise ValueError("iterations must be positive")
    if 2 * half_window + 1 > y.shape[0]:
        raise WindowTooLarge(f"window of {2 * half_window + 1} exceeds {y.shape[0]} samples")
    return _remove_trend(y, int(half_window), int(iterations))


def detect_positive_zero_crossings(signal) -> np.ndarray:
    """Indices n >= 1 with signal[n-1] < 0 <= signal[n]."""
    s = np.asarray(signal, dtype=np.float64)
    return np.flatnonzero((s[:-1] < 0) & (s[1:] >= 0)) + 1


def zff_signal(samples, half_window: int, iterations: int) -> np.ndarray:
    """The trend-removed zero-frequency filtered signal."""
    return remove_trend(zero_freq_resonate(preprocess_diff(samples)), half_window, iterations)


def _period_from_resonated(resonated: np.ndarray, sample_rate: int, cfg: ZffConfig) -> float:
    fs = sample_rate / BOOTSTRAP_DECIMATION
    nominal = fs / np.sqrt(cfg.f0_search_min_hz * cfg.f0_search_max_hz)
    half_window = max(1, int(round(cfg.window_factor * nominal / 2)))
    y = remove_trend(resonated[::BOOTSTRAP_DECIMATION], half_window, cfg.trend_iterations)
    margin = 2 * cfg.trend_iterations * half_window
    core = y[margin:len(y) - margin]
    return BOOTSTRAP_DECIMATION * _acf_period(core, fs, cfg)


def bootstrap_pitch_period(samples, sample_rate: int, cfg: ZffConfig = ZffConfig()) -> int:
    """Average pitch period estimated on a first-pass zero-frequency signal.

    The first pass uses a trend window sized for the geometric centre of
    the f0 search band. Its output carries the excitation periodicity
    without formant structure, which otherwise pulls the autocorrelation
    peak toward the first-formant period. Edge samples, where the
    truncated-window trend removal leaves a large residual, are dropped,
    and the whole first pass runs on a 4x decimated copy of the resonator
    output, whose useful content lies far below the reduced Nyquist rate;
    parabolic interpolation of the peak recovers most of the lost lag
    resolution.
    """
    if cfg.avg_pitch_period_samples is not None:
        return int(cfg.avg_pitch_period_samples)
    return int(round(_period_from_resonated(zero_freq_resonate(preprocess_diff(samples)),
                                            sample_rate, cfg)))


def extract_epochs(buffer: AudioBuffer, cfg: ZffConfig = ZffConfig()) -> EpochMarks:
    """Locate epochs as positive zero crossings of the zero-frequency filtered signal."""
    s = buffer.samples
    resonated = zero_freq_resonate(preprocess_diff(s))
    try:
        if cfg.avg_pitch_period_samples is not None:
            period = int(cfg.avg_pitch_period_samples)
        else:
            period = int(round(_period_from_resonated(resonated, buffer.sample_rate, cfg)))
    except (NoPeriodicityFound, SignalTooShort, WindowTooLarge):
        period = int(round(buffer.sample_rate / FALLBACK_F0_HZ))
        log.debug("no usable periodicity, assuming %d-sample pitch period", period)
    if len(s) < 4 * period:
        raise SignalTooShort(f"{len(s)} samples is shorter than 4 pitch periods ({period})")
    half_window = max(1, int(round(cfg.window_factor * period / 2)))
    y = remove_trend(resonated, half_window, cfg.trend_iterations)
    return EpochMarks(detect_positive_zero_crossings(y), len(s), buffer.sample_rate)
