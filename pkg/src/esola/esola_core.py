"""Epoch-synchronous overlap-add time-scale modification.

Frames of N samples are read from the input at a hop of Ss/alpha and
written to the output at a fixed hop Ss. Before each write the read
position is pushed forward by k_m so that the first epoch of the new frame
lands on the first epoch already present in the output.
"""
from __future__ import annotations

import enum
import functools
import warnings
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np
from numba import njit

from .audio_io import AudioBuffer
from .epoch_marks import EpochMarks
from .errors import (EmptySchedule, InputTooShort, MarksMismatch, OutOfBounds,
                     UnsortedSchedule)

ALPHA_MIN = 0.5
ALPHA_MAX = 2.0


class FadeCurve(str, enum.Enum):
    LINEAR = "linear"
    RAISED_COSINE = "raised_cosine"

    def weights(self, length: int) -> np.ndarray:
        """Fade-out weights for the existing output: 1 at n = 0, 0 at n = length - 1."""
        return _fade_weights(self, length)


@functools.lru_cache(maxsize=32)
def _fade_weights(kind: FadeCurve, length: int) -> np.ndarray:
    if length < 2:
        raise ValueError("overlap must span at least 2 samples")
    n = np.arange(length)
    if kind is FadeCurve.LINEAR:
        w = 1.0 - n / (length - 1)
    else:
        w = 0.5 * (1.0 + np.cos(np.pi * n / (length - 1)))
    w.setflags(write=False)
    return w


@dataclass(frozen=True)
class TsmConfig:
    frame_ms: float = 20.0
    overlap_fraction: float = 0.5
    fade: FadeCurve = FadeCurve.RAISED_COSINE

    def __post_init__(self):
        if self.frame_ms <= 0:
            raise ValueError("frame_ms must be positive")
        if not 0.0 < self.overlap_fraction < 1.0:
            raise ValueError("overlap_fraction must lie in (0, 1)")
        object.__setattr__(self, "fade", FadeCurve(self.fade))

    def frame_length(self, sample_rate: int) -> int:
        return int(round(self.frame_ms * 1e-3 * sample_rate))

    def sizes(self, sample_rate: int) -> Tuple[int, int, int]:
        """(N, L, Ss) at this sample rate."""
        n = self.frame_length(sample_rate)
        overlap = int(round(self.overlap_fraction * n))
        ss = n - overlap
        if n < 4 or ss < 1 or overlap < 2:
            raise ValueError(
                f"frame of {n} samples with overlap {overlap} is too small at {sample_rate} Hz")
        return n, overlap, ss

    def k_max(self, sample_rate: int) -> int:
        """Largest alignment shift; always the synthesis hop."""
        return self.sizes(sample_rate)[2]


@dataclass(frozen=True)
class FramePlan:
    frame_length: int
    overlap: int
    synthesis_hop: int
    analysis_hop: float
    frame_count: int
    output_length: int

    def __iter__(self):
        # unpacks as (N, L, Ss, Sa_real, frame_count, output_length)
        return iter((self.frame_length, self.overlap, self.synthesis_hop,
                     self.analysis_hop, self.frame_count, self.output_length))


class FrameRecord(NamedTuple):
    frame: int
    analysis_start: int
    k_m: int
    synthesis_start: int
    epochs_used: bool


class AlignmentTrace:
    """Per-frame alignment record of one synthesis run.

    Stored column-wise; :attr:`records` materializes one
    :class:`FrameRecord` per frame on demand.
    """

    def __init__(self, analysis_starts, shifts, epochs_used, synthesis_hop: int):
        self.analysis_starts = np.asarray(analysis_starts, dtype=np.int64)
        self._shifts = np.asarray(shifts, dtype=np.int64)
        self.epochs_used = np.asarray(epochs_used, dtype=bool)
        self.synthesis_hop = int(synthesis_hop)

    def __len__(self) -> int:
        return self._shifts.shape[0]

    def __iter__(self):
        return iter(self.records)

    @property
    def shifts(self) -> np.ndarray:
        return self._shifts

    @property
    def synthesis_starts(self) -> np.ndarray:
        return np.arange(len(self), dtype=np.int64) * self.synthesis_hop

    @property
    def records(self) -> List[FrameRecord]:
        return [FrameRecord(m, int(s), int(k), int(p), bool(u)) for m, (s, k, p, u) in
                enumerate(zip(self.analysis_starts, self._shifts, self.synthesis_starts,
                              self.epochs_used))]

    def to_csv(self) -> str:
        lines = ["frame,analysis_start,k_m,synthesis_start"]
        lines += [f"{m},{s},{k},{p}" for m, (s, k, p) in
                  enumerate(zip(self.analysis_starts.tolist(), self._shifts.tolist(),
                                self.synthesis_starts.tolist()))]
        return "\n".join(lines) + "\n"


def _check_alpha(alpha: float) -> None:
    if not ALPHA_MIN <= alpha <= ALPHA_MAX:
        warnings.warn(f"scale factor {alpha} is outside the supported range "
                      f"[{ALPHA_MIN}, {ALPHA_MAX}]", stacklevel=3)


def _plan(input_length: int, sample_rate: int, target_length: float, analysis_hop: float,
          cfg: TsmConfig) -> FramePlan:
    n, overlap, ss = cfg.sizes(sample_rate)
    if input_length < n + ss:
        raise InputTooShort(f"input of {input_length} samples is shorter than N + Ss = {n + ss}")
    target = int(round(target_length))
    if target < n:
        raise InputTooShort(f"scaled length {target} is shorter than one frame ({n})")
    frame_count = (target - n) // ss + 1
    return FramePlan(n, overlap, ss, analysis_hop, frame_count, (frame_count - 1) * ss + n)


def compute_frame_params(input_length: int, sample_rate: int, alpha: float,
                         cfg: TsmConfig = TsmConfig()) -> FramePlan:
    """Frame geometry for scaling ``input_length`` samples by ``alpha``.

    The frame count is the largest M with (M - 1) * Ss + N <= round(alpha * input_length),
    so the output is never longer than the exact target and falls short of
    it by less than Ss.
    """
    _check_alpha(alpha)
    ss = cfg.sizes(sample_rate)[2]
    return _plan(input_length, sample_rate, alpha * input_length, ss / alpha, cfg)


def epochs_in_window(marks, start: int, length: int) -> np.ndarray:
    """Epochs e with start <= e < start + length, as offsets e - start."""
    idx = marks.indices if isinstance(marks, EpochMarks) else np.asarray(marks, dtype=np.int64)
    lo = np.searchsorted(idx, start, side="left")
    hi = np.searchsorted(idx, start + length, side="left")
    return idx[lo:hi] - start


def compute_alignment_shift(synth_epochs_local: Sequence[int],
                            analysis_epochs_local: Sequence[int], k_max: int) -> int:
    """Shift that moves the nearest analysis epoch at or after the first
    synthesis epoch onto it, clamped to ``k_max``; 0 when either frame has
    no epochs or no analysis epoch follows the synthesis one.
    """
    if len(synth_epochs_local) == 0 or len(analysis_epochs_local) == 0:
        return 0
    first = int(synth_epochs_local[0])
    candidates = [int(n) - first for n in analysis_epochs_local if n >= first]
    if not candidates:
        return 0
    return min(min(candidates), k_max)


def crossfade_overlap_add(synthesis: np.ndarray, analysis_frame: np.ndarray, position: int,
                          overlap: int, fade: FadeCurve = FadeCurve.RAISED_COSINE) -> None:
    """Blend the first ``overlap`` samples of the frame into ``synthesis`` and copy the rest."""
    n = len(analysis_frame)
    if overlap >= n:
        raise ValueError("overlap must be shorter than the frame")
    if position < 0 or position + n > len(synthesis):
        raise OutOfBounds(f"frame [{position}, {position + n}) outside output of "
                          f"{len(synthesis)} samples")
    w = FadeCurve(fade).weights(overlap)
    head = synthesis[position:position + overlap]
    synthesis[position:position + overlap] = w * head + (1.0 - w) * analysis_frame[:overlap]
    synthesis[position + overlap:position + n] = analysis_frame[overlap:]


def analysis_starts(plan: FramePlan, input_length: int) -> np.ndarray:
    """round(m * Sa) for every frame, clamped so a frame never reads past the input."""
    # np.rint rounds half to even, like round()
    starts = np.rint(np.arange(plan.frame_count) * plan.analysis_hop).astype(np.int64)
    return np.minimum(starts, input_length - plan.frame_length)


@njit(cache=True)
def _blend(y, frame, pos, weights):
    overlap = weights.shape[0]
    for i in range(overlap):
        y[pos + i] = weights[i] * y[pos + i] + (1.0 - weights[i]) * frame[i]
    for i in range(overlap, frame.shape[0]):
        y[pos + i] = frame[i]


@njit(cache=True)
def _epoch_synchronous_ola(x, starts, epochs, n, ss, out_len, k_limit, weights, align):
    """Frame loop. Output epochs are tracked as the positions where the
    previous frame's input epochs landed: frame m overwrites the output
    from m * Ss on, so nothing older can be found at or after (m + 1) * Ss."""
    frame_count = starts.shape[0]
    y = np.zeros(out_len)
    shifts = np.zeros(frame_count, dtype=np.int64)
    used = np.zeros(frame_count, dtype=np.bool_)
    landed = np.empty(n + 1, dtype=np.int64)
    n_landed = 0
    last_start = x.shape[0] - n
    for m in range(frame_count):
        start = starts[m]
        pos = m * ss
        k = 0
        if align and m > 0:
            first = 0
            while first < n_landed and landed[first] < pos:
                first += 1
            k_max = min(k_limit, last_start - start)
            lo = np.searchsorted(epochs, start)
            have_analysis = lo < epochs.shape[0] and epochs[lo] < start + n
            have_synth = first < n_landed and landed[first] < pos + n
            if have_analysis and have_synth:
                used[m] = True
                ell = landed[first] - pos
                j = np.searchsorted(epochs, start + ell)
                if j < epochs.shape[0] and epochs[j] < start + n:
                    k = min(epochs[j] - start - ell, k_max)
        shifts[m] = k
        read = start + k
        if m == 0:
            y[:n] = x[read:read + n]
        else:
            _blend(y, x[read:read + n], pos, weights)
        n_landed = 0
        j = np.searchsorted(epochs, read)
        while j < epochs.shape[0] and epochs[j] < read + n:
            landed[n_landed] = epochs[j] - read + pos
            n_landed += 1
            j += 1
    return y, shifts, used


def synthesize(x: np.ndarray, starts: np.ndarray, plan: FramePlan, fade: FadeCurve,
               epochs: np.ndarray | None) -> Tuple[np.ndarray, AlignmentTrace]:
    """Fixed-synthesis overlap-add of frames read at starts[m] + k_m.

    With ``epochs`` the shifts align epochs (ESOLA); with None every shift
    is 0 (plain OLA).
    """
    align = epochs is not None
    ep = np.ascontiguousarray(epochs if align else np.empty(0), dtype=np.int64)
    weights = FadeCurve(fade).weights(plan.overlap)
    y, shifts, used = _epoch_synchronous_ola(
        np.ascontiguousarray(x, dtype=np.float64), np.ascontiguousarray(starts, dtype=np.int64),
        ep, plan.frame_length, plan.synthesis_hop, plan.output_length, plan.synthesis_hop,
        weights, align)
    return y, make_trace(starts, shifts, used, plan.synthesis_hop)


def make_trace(starts, shifts, used, ss: int) -> AlignmentTrace:
    return AlignmentTrace(starts, shifts, used, ss)


def _check_marks(buffer: AudioBuffer, marks: EpochMarks) -> None:
    if marks.signal_length != len(buffer):
        raise MarksMismatch(
            f"marks refer to {marks.signal_length} samples, buffer has {len(buffer)}")


def time_scale(buffer: AudioBuffer, marks: EpochMarks, alpha: float,
               cfg: TsmConfig = TsmConfig()) -> Tuple[AudioBuffer, AlignmentTrace]:
    """Scale the duration of ``buffer`` by ``alpha`` keeping its pitch.

    Input samples past the last analysis frame are dropped; the output
    length is (M - 1) * Ss + N, within Ss of round(alpha * len(buffer)).
    """
    _check_marks(buffer, marks)
    plan = compute_frame_params(len(buffer), buffer.sample_rate, alpha, cfg)
    starts = analysis_starts(plan, len(buffer))
    y, trace = synthesize(buffer.samples, starts, plan, cfg.fade, marks.indices)
    return buffer.with_samples(y), trace


def _validate_schedule(schedule) -> Tuple[np.ndarray, np.ndarray]:
    if len(schedule) == 0:
        raise EmptySchedule("schedule has no breakpoints")
    times = np.array([float(t) for t, _ in schedule])
    alphas = np.array([float(a) for _, a in schedule])
    if np.any(np.diff(times) <= 0):
        raise UnsortedSchedule("breakpoint times must be strictly increasing")
    for a in alphas:
        _check_alpha(a)
    if np.any(alphas <= 0):
        raise ValueError("scale factors must be positive")
    return times, alphas


def schedule_starts(times: np.ndarray, alphas: np.ndarray, sample_rate: int,
                    input_length: int, cfg: TsmConfig) -> Tuple[FramePlan, np.ndarray]:
    """Frame plan and analysis starts for a piecewise-constant scale factor.

    Within a constant stretch starting at frame a with read position p_a the
    read position is p_a + (m - a) * Ss / alpha; a single breakpoint gives
    exactly m * Ss / alpha, the fixed-factor positions.
    """
    ss = cfg.sizes(sample_rate)[2]
    bounds = np.clip(times * sample_rate, 0.0, float(input_length))
    bounds[0] = 0.0
    edges = list(bounds) + [float(input_length)]
    target = sum(float(a) * (edges[i + 1] - edges[i]) for i, a in enumerate(alphas))
    if len(alphas) == 1:
        target = float(alphas[0]) * input_length

    def alpha_at(pos: float) -> float:
        i = int(np.searchsorted(times * sample_rate, pos, side="right")) - 1
        return float(alphas[max(i, 0)])

    plan = _plan(input_length, sample_rate, target, ss / float(alphas[0]), cfg)
    seg_alpha = alpha_at(0.0)
    hop = ss / seg_alpha
    anchor_pos, anchor_m = 0.0, 0
    starts = []
    for m in range(plan.frame_count):
        pos = anchor_pos + (m - anchor_m) * hop
        starts.append(int(round(pos)))
        a = alpha_at(pos)
        if a != seg_alpha:
            seg_alpha, hop = a, ss / a
            anchor_pos, anchor_m = pos, m
    starts = np.minimum(np.array(starts, dtype=np.int64), input_length - plan.frame_length)
    return plan, starts


def time_scale_scheduled(buffer: AudioBuffer, marks: EpochMarks,
                         schedule: Sequence[Tuple[float, float]],
                         cfg: TsmConfig = TsmConfig()) -> AudioBuffer:
    """Time scaling with a scale factor that changes at (time_s, alpha) breakpoints.

    The factor in force at a frame is that of the last breakpoint at or
    before the frame's read position (the first breakpoint before that).
    """
    _check_marks(buffer, marks)
    times, alphas = _validate_schedule(schedule)
    plan, starts = schedule_starts(times, alphas, buffer.sample_rate, len(buffer), cfg)
    y, _ = synthesize(buffer.samples, starts, plan, cfg.fade, marks.indices)
    return buffer.with_samples(y)
