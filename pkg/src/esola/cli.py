"""Command-line interface: epochs, ts, ps, analyze, bench.

Exit codes: 0 success, 1 I/O or file-format error, 2 bad arguments,
3 processing error.
"""
from __future__ import annotations

import argparse
import csv
import statistics
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import analysis
from .audio_io import read_wav, write_wav
from .baselines import ola_time_scale, solafs_time_scale, SolafsConfig
from .epoch_marks import embed_lsb, extract_lsb, read_marks_file, write_marks_file
from .errors import (EmptyAudio, EmptySchedule, EsolaError, IoFailure, MalformedContainer,
                     MalformedMarksFile, UnsortedSchedule, UnsupportedFormat)
from .esola_core import FadeCurve, TsmConfig, time_scale, time_scale_scheduled
from .pitch_scaling import pitch_scale
from .zff_epochs import ZffConfig, extract_epochs

EXIT_OK, EXIT_IO, EXIT_ARGS, EXIT_PROCESSING = 0, 1, 2, 3
METHODS = ("esola", "ola", "solafs")
# F0 band for reported pitch; wide enough for 0.5x/2x shifts of typical voices
REPORT_F0_MIN, REPORT_F0_MAX, REPORT_FRAME_MS = 50.0, 500.0, 50.0

_IO_ERRORS = (IoFailure, MalformedContainer, UnsupportedFormat, EmptyAudio, MalformedMarksFile)


class UsageError(Exception):
    """Bad combination of arguments detected after parsing."""


def _zff_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("epoch extraction")
    g.add_argument("--f0-min", type=float, default=66.0, help="lowest expected F0, Hz")
    g.add_argument("--f0-max", type=float, default=400.0, help="highest expected F0, Hz")
    g.add_argument("--trend-iters", type=int, default=3, help="mean-subtraction passes")
    g.add_argument("--window-factor", type=float, default=1.5,
                   help="trend window as a multiple of the average pitch period (1-2)")


def _tsm_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--marks", help="epoch marks file for the input")
    src.add_argument("--use-embedded-epochs", action="store_true",
                     help="read epochs from the input's sample LSBs (see `epochs --embed`)")
    g = p.add_argument_group("frames")
    g.add_argument("--frame-ms", type=float, default=20.0)
    g.add_argument("--overlap", type=float, default=0.5, help="overlap fraction in (0, 1)")
    g.add_argument("--fade", choices=[f.value for f in FadeCurve], default="raised_cosine")
    _zff_args(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="esola", description="Epoch-synchronous overlap-add time and pitch scaling.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("epochs", help="extract epochs; save a marks file and/or embed them")
    p.add_argument("--input", required=True)
    p.add_argument("--marks", help="write epochs to this marks file")
    p.add_argument("--embed", action="store_true", help="write a copy with epochs in the LSBs")
    p.add_argument("--output", help="output WAV for --embed")
    _zff_args(p)

    p = sub.add_parser(
        "ts", help="time-scale",
        description="Change duration by --factor keeping pitch. Input samples after the "
                    "last whole analysis frame are dropped; the output length is within "
                    "one synthesis hop of factor * input length.")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--factor", type=float, help="duration multiplier (0.5-2)")
    p.add_argument("--method", choices=METHODS, default="esola")
    p.add_argument("--schedule", help="file of `time_s alpha` breakpoints (esola only)")
    p.add_argument("--trace", help="write the per-frame alignment shifts as CSV")
    _tsm_args(p)

    p = sub.add_parser("ps", help="pitch-scale, keeping duration")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--factor", type=float, required=True, help="pitch multiplier (0.5-2)")
    _tsm_args(p)

    p = sub.add_parser("analyze", help="F0 track and spectrogram export")
    p.add_argument("--input", required=True)
    p.add_argument("--pitch-csv", help="write time_s,f0_hz,voicing")
    p.add_argument("--spectrogram-csv", help="write time_s,freq_hz,magnitude_db")

    p = sub.add_parser("bench", help="time ESOLA against the OLA/SOLAFS baselines")
    p.add_argument("--input", required=True)
    p.add_argument("--factors", default="0.5,0.75,1.25,1.5,2")
    p.add_argument("--methods", default="esola,ola,solafs")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--csv", help="write results here (default: standard output)")
    return parser


def _zff_config(args) -> ZffConfig:
    try:
        return ZffConfig(window_factor=args.window_factor, trend_iterations=args.trend_iters,
                         f0_search_min_hz=args.f0_min, f0_search_max_hz=args.f0_max)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _tsm_config(args) -> TsmConfig:
    try:
        return TsmConfig(frame_ms=args.frame_ms, overlap_fraction=args.overlap, fade=args.fade)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _marks_for(args, buffer):
    if args.marks:
        return read_marks_file(args.marks)
    if args.use_embedded_epochs:
        return extract_lsb(buffer)
    return extract_epochs(buffer, _zff_config(args))


def read_schedule(path):
    """Parse `time_s alpha` lines; blank lines and # comments are ignored."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    schedule = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if len(parts) != 2:
                raise ValueError
            schedule.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise MalformedContainer(f"{path}:{lineno}: expected `time_s alpha`") from None
    return schedule


def _mean_f0(buffer) -> float:
    track = analysis.estimate_f0_track(buffer, frame_ms=REPORT_FRAME_MS,
                                       f0_min=REPORT_F0_MIN, f0_max=REPORT_F0_MAX)
    return analysis.mean_f0(track)


def cmd_epochs(args) -> int:
    if args.embed and not args.output:
        raise UsageError("--embed needs --output")
    if args.output and not args.embed:
        raise UsageError("--output is only used with --embed")
    buffer = read_wav(args.input)
    marks = extract_epochs(buffer, _zff_config(args))
    if args.marks:
        write_marks_file(marks, args.marks)
    if args.embed:
        write_wav(embed_lsb(buffer, marks), args.output)
    interval_ms = 1e3 * marks.mean_interval() / buffer.sample_rate
    print(f"{len(marks)} epochs, mean interval {interval_ms:.3f} ms")
    return EXIT_OK


def cmd_ts(args) -> int:
    if args.schedule is None and args.factor is None:
        raise UsageError("--factor is required unless --schedule is given")
    if args.schedule is not None and args.factor is not None:
        raise UsageError("--factor and --schedule are mutually exclusive")
    if args.method != "esola" and (args.schedule or args.marks or args.use_embedded_epochs):
        raise UsageError("--schedule/--marks/--use-embedded-epochs apply to --method esola only")
    cfg = _tsm_config(args)
    buffer = read_wav(args.input)
    trace = None
    if args.method == "esola":
        marks = _marks_for(args, buffer)
        if args.schedule:
            out = time_scale_scheduled(buffer, marks, read_schedule(args.schedule), cfg)
        else:
            out, trace = time_scale(buffer, marks, args.factor, cfg)
    elif args.method == "solafs":
        out, trace = solafs_time_scale(
            buffer, args.factor, SolafsConfig(cfg.frame_ms, cfg.overlap_fraction, cfg.fade))
    else:
        out = ola_time_scale(buffer, args.factor, cfg)
    write_wav(out, args.output)
    if args.trace:
        if trace is None:
            raise UsageError("--trace is not available for this method/schedule")
        try:
            Path(args.trace).write_text(trace.to_csv(), encoding="utf-8", newline="\n")
        except OSError as exc:
            raise IoFailure(f"cannot write {args.trace}: {exc}") from exc
    print(f"{len(buffer)} -> {len(out)} samples ({out.duration:.3f} s)")
    return EXIT_OK


def cmd_ps(args) -> int:
    cfg = _tsm_config(args)
    buffer = read_wav(args.input)
    marks = _marks_for(args, buffer)
    out = pitch_scale(buffer, marks, args.factor, cfg)
    write_wav(out, args.output)
    f_in, f_out = _mean_f0(buffer), _mean_f0(out)
    print(f"input: {buffer.duration:.3f} s, mean F0 {f_in:.2f} Hz")
    print(f"output: {out.duration:.3f} s, mean F0 {f_out:.2f} Hz")
    if f_in > 0:
        print(f"F0 ratio: {f_out / f_in:.4f}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    buffer = read_wav(args.input)
    track = analysis.estimate_f0_track(buffer)
    if args.pitch_csv:
        try:
            Path(args.pitch_csv).write_text(track.to_csv(), encoding="utf-8", newline="\n")
        except OSError as exc:
            raise IoFailure(f"cannot write {args.pitch_csv}: {exc}") from exc
    if args.spectrogram_csv:
        analysis.spectrogram_csv(buffer, args.spectrogram_csv)
    print(f"duration: {buffer.duration:.3f} s")
    print(f"sample rate: {buffer.sample_rate} Hz")
    print(f"mean F0: {analysis.mean_f0(track):.2f} Hz")
    return EXIT_OK


def _parse_list(text: str, convert, name: str):
    try:
        items = [convert(t.strip()) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"cannot parse --{name} {text!r}") from None
    if not items:
        raise UsageError(f"--{name} is empty")
    return items


def run_method(method: str, buffer, alpha: float):
    """One timed unit of work; ESOLA includes epoch extraction."""
    if method == "esola":
        return time_scale(buffer, extract_epochs(buffer), alpha)[0]
    if method == "solafs":
        return solafs_time_scale(buffer, alpha)[0]
    return ola_time_scale(buffer, alpha)


def benchmark(buffer, methods, factors, repeats: int):
    """Rows of (method, factor, median_seconds, duration_error_samples, f0_dev_pct)."""
    f0_in = _mean_f0(buffer)
    rows = []
    for method in methods:
        for alpha in factors:
            out = run_method(method, buffer, alpha)  # also compiles kernels on first use
            times = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                run_method(method, buffer, alpha)
                times.append(time.perf_counter() - t0)
            dev = 100.0 * abs(_mean_f0(out) - f0_in) / f0_in if f0_in > 0 else float("nan")
            rows.append((method, alpha, statistics.median(times),
                         analysis.duration_error(len(out), len(buffer), alpha), dev))
    return rows


def cmd_bench(args) -> int:
    methods = _parse_list(args.methods, str, "methods")
    unknown = sorted(set(methods) - set(METHODS))
    if unknown:
        raise UsageError(f"unknown method(s): {', '.join(unknown)}")
    factors = _parse_list(args.factors, float, "factors")
    if args.repeats < 1:
        raise UsageError("--repeats must be >= 1")
    buffer = read_wav(args.input)
    rows = benchmark(buffer, methods, factors, args.repeats)

    header = ["method", "factor", "median_seconds", "duration_error_samples", "f0_dev_pct"]
    fmt = [[m, f"{a:g}", f"{t:.6f}", str(e), f"{d:.3f}"] for m, a, t, e, d in rows]
    if args.csv:
        try:
            with open(args.csv, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                w.writerows(fmt)
        except OSError as exc:
            raise IoFailure(f"cannot write {args.csv}: {exc}") from exc
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        w.writerows(fmt)

    timing = {(m, a): t for m, a, t, _, _ in rows}
    for a in factors:
        if ("esola", a) in timing and ("solafs", a) in timing:
            ratio = timing["esola", a] / timing["solafs", a]
            print(f"factor {a:g}: esola/solafs time ratio {ratio:.3f}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {"epochs": cmd_epochs, "ts": cmd_ts, "ps": cmd_ps,
            "analyze": cmd_analyze, "bench": cmd_bench}


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad arguments
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        warnings.showwarning = _show_warning
        return _dispatch(args)


def _dispatch(args) -> int:
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"esola {args.command}: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except (EmptySchedule, UnsortedSchedule) as exc:
        print(f"esola {args.command}: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except _IO_ERRORS as exc:
        print(f"esola {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except EsolaError as exc:
        print(f"esola {args.command}: {exc}", file=sys.stderr)
        return EXIT_PROCESSING


if __name__ == "__main__":
    sys.exit(main())
