import numpy as np
import pytest

from esola.synthetic import pulse_train, speech_like, two_rate_proxy, voiced_proxy, white_noise

FS = 16000


def test_pulse_train_polarity_and_spacing():
    e = pulse_train(8.5, 100)
    idx = np.flatnonzero(e)
    assert np.all(e[idx] == -1.0)
    assert set(np.diff(idx)) <= {8, 9}


@pytest.mark.parametrize("f0", [90.0, 120.0, 250.0])
def test_voiced_proxy(f0):
    sig = voiced_proxy(f0, 1.0, FS)
    assert len(sig.buffer) == FS
    assert np.max(np.abs(sig.buffer.samples)) == pytest.approx(0.5)
    assert np.mean(np.diff(sig.pulses)) == pytest.approx(FS / f0, rel=1e-3)


def test_two_rate_halves():
    sig = two_rate_proxy(5.0, 10.0, sample_rate=FS)
    gaps = np.diff(sig.pulses)
    assert set(gaps[:150]) == {80} and set(gaps[-50:]) == {160}


def test_speech_like_is_deterministic_and_plausible():
    a, b = speech_like(2.0, FS, seed=4), speech_like(2.0, FS, seed=4)
    assert np.array_equal(a.buffer.samples, b.buffer.samples)
    assert np.array_equal(a.pulses, b.pulses)
    assert np.max(np.abs(a.buffer.samples)) <= 1.0
    f0 = FS / np.diff(a.pulses)
    typical = f0[(f0 > 60) & (f0 < 300)]
    assert len(typical) > 0.8 * len(f0)
    assert 90 < np.median(typical) < 190


def test_white_noise_seeded():
    assert np.array_equal(white_noise(0.1, FS, seed=2).samples, white_noise(0.1, FS, seed=2).samples)
    assert np.max(np.abs(white_noise(0.1, FS, amplitude=0.3).samples)) == pytest.approx(0.3)
