"""Epoch-synchronous overlap-add (ESOLA) time and pitch scaling of speech.

Epochs (glottal closure instants) come from zero-frequency filtering;
each synthesis frame is shifted so its first epoch lands on the next
epoch already in the output, which keeps pitch periods intact without a
correlation search.
"""
from .audio_io import AudioBuffer, read_wav, write_wav
from .epoch_marks import (EpochMarks, embed_lsb, extract_lsb, read_marks_file,
                          write_marks_file)
from .esola_core import (AlignmentTrace, FadeCurve, FramePlan, TsmConfig, time_scale,
                         time_scale_scheduled)
from .pitch_scaling import ResampleSpec, pitch_scale, resample
from .zff_epochs import ZffConfig, extract_epochs
from .baselines import SolafsConfig, ola_time_scale, solafs_time_scale
from .analysis import F0Track, estimate_f0_track, mean_f0, spectrogram

__all__ = [
    "AudioBuffer", "read_wav", "write_wav",
    "EpochMarks", "embed_lsb", "extract_lsb", "read_marks_file", "write_marks_file",
    "AlignmentTrace", "FadeCurve", "FramePlan", "TsmConfig", "time_scale",
    "time_scale_scheduled",
    "ResampleSpec", "pitch_scale", "resample",
    "ZffConfig", "extract_epochs",
    "SolafsConfig", "ola_time_scale", "solafs_time_scale",
    "F0Track", "estimate_f0_track", "mean_f0", "spectrogram",
]
__version__ = "0.1.0"
