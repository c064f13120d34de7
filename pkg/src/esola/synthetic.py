"""Deterministic test signals with known glottal closure instants.

Excitation pulses are negative-going, the polarity of the differentiated
glottal flow at closure in real speech.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .audio_io import AudioBuffer


@dataclass
class SyntheticSignal:
    buffer: AudioBuffer
    pulses: np.ndarray  # generator pulse (GCI) positions, samples


def _resonator_coeffs(freq_hz, bandwidth_hz, fs):
    r = np.exp(-np.pi * bandwidth_hz / fs)
    theta = 2 * np.pi * freq_hz / fs
    return np.array([1.0, -2 * r * np.cos(theta), r * r])


def _pulse_positions(period: float, length: int, start: float = 0.0) -> np.ndarray:
    pos = np.round(np.arange(start, length, period)).astype(np.int64)
    return pos[pos < length]


def pulse_train(period: float, length: int, start: float = 0.0) -> np.ndarray:
    """Negative unit impulses every ``period`` samples (fractional periods rounded)."""
    e = np.zeros(length)
    e[_pulse_positions(period, length, start)] = -1.0
    return e


def voiced_proxy(f0_hz: float = 120.0, duration_s: float = 2.0, sample_rate: int = 16000,
                 resonance_hz: float = 800.0, bandwidth_hz: float = 100.0,
                 peak: float = 0.5) -> SyntheticSignal:
    """Impulse train at ``f0_hz`` filtered by one two-pole resonance."""
    n = int(round(duration_s * sample_rate))
    period = sample_rate / f0_hz
    e = pulse_train(period, n)
    s = lfilter([1.0], _resonator_coeffs(resonance_hz, bandwidth_hz, sample_rate), e)
    s *= peak / np.max(np.abs(s))
    return SyntheticSignal(AudioBuffer(s, sample_rate), _pulse_positions(period, n))


def two_rate_proxy(period_ms_a: float = 5.0, period_ms_b: float = 10.0,
                   half_s: float = 1.0, sample_rate: int = 16000) -> SyntheticSignal:
    """Two pulse trains back to back (different periods), same resonance."""
    n_half = int(round(half_s * sample_rate))
    pa = _pulse_positions(period_ms_a * 1e-3 * sample_rate, n_half)
    pb = _pulse_positions(period_ms_b * 1e-3 * sample_rate, n_half) + n_half
    pulses = np.concatenate([pa, pb])
    e = np.zeros(2 * n_half)
    e[pulses] = -1.0
    s = lfilter([1.0], _resonator_coeffs(800.0, 100.0, sample_rate), e)
    s *= 0.5 / np.max(np.abs(s))
    return SyntheticSignal(AudioBuffer(s, sample_rate), pulses)


def sine(freq_hz: float, duration_s: float, sample_rate: int = 16000,
         amplitude: float = 0.5) -> AudioBuffer:
    n = np.arange(int(round(duration_s * sample_rate)))
    return AudioBuffer(amplitude * np.sin(2 * np.pi * freq_hz * n / sample_rate), sample_rate)


def white_noise(duration_s: float, sample_rate: int = 16000, amplitude: float = 0.3,
                seed: int = 0) -> AudioBuffer:
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(int(round(duration_s * sample_rate)))
    return AudioBuffer(amplitude * x / np.max(np.abs(x)), sample_rate)


# (F1, F2, F3) in Hz for a handful of vowels
_VOWELS = {
    "a": (730, 1090, 2440),
    "i": (270, 2290, 3010),
    "u": (300, 870, 2240),
    "e": (530, 1840, 2480),
    "o": (570, 840, 2410),
}
_BANDWIDTHS = (80.0, 120.0, 160.0)


def _glottal_pulse(period: int, open_q: float = 0.6, close_q: float = 0.15) -> np.ndarray:
    """One period of differentiated Rosenberg glottal flow; sharp negative step at closure."""
    t_open = max(2, int(open_q * period))
    t_close = max(1, int(close_q * period))
    flow = np.zeros(period)
    n1 = np.arange(t_open)
    flow[:t_open] = 0.5 * (1 - np.cos(np.pi * n1 / t_open))
    n2 = np.arange(t_close)
    flow[t_open:t_open + t_close] = np.cos(0.5 * np.pi * n2 / t_close)
    return np.diff(flow, prepend=0.0)


def speech_like(duration_s: float = 4.0, sample_rate: int = 16000, seed: int = 7,
                peak: float = 0.9) -> SyntheticSignal:
    """A formant-synthesized utterance: voiced vowels with an intonation
    contour, fricative noise bursts and short pauses.

    Returned pulse positions are the glottal closure instants of the source.
    """
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * sample_rate))
    t = np.arange(n) / sample_rate

    # segment plan: (kind, seconds); kinds cycle vowel/fricative/pause
    plan = []
    total = 0.0
    vowels = list(_VOWELS)
    while total < duration_s:
        kind = rng.choice(["vowel", "vowel", "vowel", "fric", "pause"])
        dur = {"vowel": rng.uniform(0.15, 0.35), "fric": rng.uniform(0.06, 0.12),
               "pause": rng.uniform(0.05, 0.15)}[kind]
        plan.append((kind, total, min(total + dur, duration_s), rng.choice(vowels)))
        total += dur

    voiced = np.zeros(n, dtype=bool)
    fric = np.zeros(n, dtype=bool)
    formants = np.zeros((n, 3))
    current = np.array(_VOWELS["a"], dtype=float)
    for kind, t0, t1, vowel in plan:
        i0, i1 = int(t0 * sample_rate), int(t1 * sample_rate)
        if kind == "vowel":
            voiced[i0:i1] = True
            target = np.array(_VOWELS[vowel], dtype=float)
            # glide from the previous vowel over the first 40 ms
            ramp = np.clip(np.arange(i1 - i0) / (0.04 * sample_rate), 0, 1)[:, None]
            formants[i0:i1] = current + (target - current) * ramp
            current = target
        else:
            formants[i0:i1] = current
            if kind == "fric":
                fric[i0:i1] = True

    # intonation: declination plus two slow bumps, around 100-180 Hz
    f0 = 150 - 30 * t / duration_s + 20 * np.sin(2 * np.pi * 0.7 * t + 0.3) \
        + 8 * np.sin(2 * np.pi * 2.3 * t)

    excitation = np.zeros(n)
    pulses = []
    pos = 0.0
    while pos < n:
        i = int(pos)
        period = sample_rate / f0[i] * (1 + 0.01 * rng.standard_normal())
        p = int(round(period))
        if voiced[i] and i + p <= n and voiced[min(i + p, n - 1)]:
            pulse = _glottal_pulse(p)
            close = int(np.argmin(pulse))
            excitation[i:i + p] += pulse
            pulses.append(i + close)
        pos += period

    noise = rng.standard_normal(n)
    excitation += np.where(fric, 0.08, 0.0) * noise

    # time-varying formant cascade, coefficients updated every 5 ms
    block = int(0.005 * sample_rate)
    out = excitation
    for k in range(3):
        zi = np.zeros(2)
        y = np.empty(n)
        for b0 in range(0, n, block):
            b1 = min(b0 + block, n)
            a = _resonator_coeffs(formants[b0, k] or 500.0, _BANDWIDTHS[k], sample_rate)
            gain = np.sum(a)  # unity gain at DC keeps levels comparable
            y[b0:b1], zi = lfilter([gain], a, out[b0:b1], zi=zi)
        out = y

    # smooth amplitude envelope so onsets/offsets are not clicks
    active = (voiced | fric).astype(float)
    win = np.hanning(int(0.02 * sample_rate))
    env = np.convolve(active, win / win.sum(), mode="same")
    out = out * (0.05 + 0.95 * env)
    out = out / np.max(np.abs(out)) * peak
    out += 1e-4 * rng.standard_normal(n)
    out = np.clip(out, -1.0, 1.0)
    return SyntheticSignal(AudioBuffer(out, sample_rate), np.array(pulses, dtype=np.int64))
