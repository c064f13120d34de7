"""Write the synthetic test corpus as 16-bit WAVs (plus generator pulse positions)."""
import argparse
from pathlib import Path

import numpy as np

from esola.audio_io import AudioBuffer, write_wav
from esola.epoch_marks import EpochMarks, write_marks_file
from esola.synthetic import sine, speech_like, two_rate_proxy, voiced_proxy, white_noise


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="corpus", help="output directory")
    ap.add_argument("--rate", type=int, default=16000)
    ap.add_argument("--long-seconds", type=float, default=10.0,
                    help="duration of the benchmark utterance")
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fs = args.rate

    signals = {
        "proxy120": voiced_proxy(120.0, 3.0, fs),
        "two_rate": two_rate_proxy(sample_rate=fs),
        "speech": speech_like(4.0, fs),
        "speech_long": speech_like(args.long_seconds, fs, seed=11),
    }
    for name, sig in signals.items():
        write_wav(sig.buffer, out / f"{name}.wav")
        # the generator's own excitation instants, for scoring extractors
        write_marks_file(EpochMarks(sig.pulses, len(sig.buffer), fs), out / f"{name}.truth.epo")
    write_wav(white_noise(3.0, fs, seed=3), out / "noise.wav")
    write_wav(sine(150.0, 2.0, fs, amplitude=0.5), out / "sine150.wav")
    write_wav(AudioBuffer(np.zeros(fs), fs), out / "silence.wav")
    for p in sorted(out.glob("*.wav")):
        print(p)


if __name__ == "__main__":
    main()
