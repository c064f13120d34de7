"""OLA and SOLAFS time scaling, for comparison with ESOLA.

Both use the fixed-synthesis frame geometry of :mod:`esola.esola_core`;
only the choice of the per-frame read offset differs. SOLAFS searches
every offset in [0, k_max] for the best waveform match, which is the
O(k_max * L) per-frame cost that epoch alignment avoids.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numba import njit

from .audio_io import AudioBuffer
from .errors import LengthMismatch
from .esola_core import (AlignmentTrace, TsmConfig, _blend, analysis_starts,
                         compute_frame_params, make_trace, synthesize)


@dataclass(frozen=True)
class SolafsConfig(TsmConfig):
    k_max: Optional[int] = None  # None: the synthesis hop Ss

    def search_range(self, sample_rate: int) -> int:
        return self.sizes(sample_rate)[2] if self.k_max is None else int(self.k_max)


def ola_time_scale(buffer: AudioBuffer, alpha: float, cfg: TsmConfig = TsmConfig()) -> AudioBuffer:
    """Plain overlap-add: the ESOLA frame loop with every shift forced to 0."""
    plan = compute_frame_params(len(buffer), buffer.sample_rate, alpha, cfg)
    starts = analysis_starts(plan, len(buffer))
    y, _ = synthesize(buffer.samples, starts, plan, cfg.fade, None)
    return buffer.with_samples(y)


def normalized_cross_correlation(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.size == 0:
        raise LengthMismatch(f"windows of length {a.size} and {b.size}")
    energy = float(np.dot(a, a)) * float(np.dot(b, b))
    if energy <= 0.0:
        return 0.0
    return float(np.clip(np.dot(a, b) / np.sqrt(energy), -1.0, 1.0))


@njit(cache=True)
def _best_lag(reference, segment, k_max):
    width = reference.shape[0]
    e_ref = 0.0
    e_seg = 0.0
    for i in range(width):
        e_ref += reference[i] * reference[i]
        e_seg += segment[i] * segment[i]
    best_k = 0
    best = -np.inf
    for k in range(k_max + 1):
        if k > 0:
            # slide the energy window by one sample
            e_seg += segment[k + width - 1] ** 2 - segment[k - 1] ** 2
        num = 0.0
        for i in range(width):
            num += reference[i] * segment[k + i]
        denom = np.sqrt(e_ref * max(e_seg, 0.0))
        score = num / denom if denom > 0.0 else 0.0
        if score > best:
            best = score
            best_k = k
    return best_k


def best_lag(reference, segment, k_max: int) -> int:
    """argmax over k in [0, k_max] of the NCC between ``reference`` and
    segment[k:k + len(reference)]; the smallest k wins ties."""
    ref = np.ascontiguousarray(reference, dtype=np.float64)
    seg = np.ascontiguousarray(segment, dtype=np.float64)
    if len(seg) < k_max + len(ref):
        raise LengthMismatch(f"segment of {len(seg)} samples cannot cover lag {k_max}")
    return int(_best_lag(ref, seg, int(k_max)))


@njit(cache=True)
def _solafs_loop(x, starts, n, overlap, ss, out_len, k_limit, weights):
    frame_count = starts.shape[0]
    y = np.zeros(out_len)
    shifts = np.zeros(frame_count, dtype=np.int64)
    used = np.zeros(frame_count, dtype=np.bool_)
    last_start = x.shape[0] - n
    y[:n] = x[starts[0]:starts[0] + n]
    for m in range(1, frame_count):
        start = starts[m]
        pos = m * ss
        k_max = min(k_limit, last_start - start)
        k = 0
        if k_max > 0:
            k = _best_lag(y[pos:pos + overlap], x[start:start + k_max + overlap], k_max)
            used[m] = True
        shifts[m] = k
        _blend(y, x[start + k:start + k + n], pos, weights)
    return y, shifts, used


def solafs_time_scale(buffer: AudioBuffer, alpha: float,
                      cfg: SolafsConfig = SolafsConfig()) -> Tuple[AudioBuffer, AlignmentTrace]:
    """SOLA with fixed synthesis: each frame's read offset maximizes the
    correlation between its first L samples and the output overlap region."""
    plan = compute_frame_params(len(buffer), buffer.sample_rate, alpha, cfg)
    starts = analysis_starts(plan, len(buffer))
    y, shifts, used = _solafs_loop(
        np.ascontiguousarray(buffer.samples), starts, plan.frame_length, plan.overlap,
        plan.synthesis_hop, plan.output_length, cfg.search_range(buffer.sample_rate),
        cfg.fade.weights(plan.overlap))
    return buffer.with_samples(y), make_trace(starts, shifts, used, plan.synthesis_hop)
