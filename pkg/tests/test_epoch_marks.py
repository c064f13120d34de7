import numpy as np
import pytest
from hypothesis import given, strategies as st

from esola.audio_io import AudioBuffer, from_pcm16, to_pcm16
from esola.epoch_marks import (EpochMarks, embed_lsb, extract_lsb, format_marks, parse_marks,
                               read_marks_file, write_marks_file)
from esola.errors import IoFailure, LengthMismatch, MalformedMarksFile, RateMismatch


def buf_from_words(w, rate=16000):
    return AudioBuffer(from_pcm16(np.asarray(w, dtype=np.int16)), rate)


@st.composite
def buffers_and_marks(draw):
    n = draw(st.integers(1, 500))
    w = draw(st.lists(st.integers(-32768, 32767), min_size=n, max_size=n))
    idx = sorted(draw(st.sets(st.integers(0, n - 1))))
    return buf_from_words(w), EpochMarks(np.array(idx, dtype=np.int64), n, 16000)


def test_embed_by_hand():
    marked = embed_lsb(buf_from_words([4, 5, 6, 7]), EpochMarks([1, 2], 4, 16000))
    assert to_pcm16(marked.samples).tolist() == [4, 5, 7, 6]


def test_empty_marks_clear_every_lsb():
    marked = embed_lsb(buf_from_words([1, 3, -5, 7]), EpochMarks([], 4, 16000))
    assert np.all(to_pcm16(marked.samples) % 2 == 0)


def test_all_even_gives_no_marks():
    assert len(extract_lsb(buf_from_words([0, 2, -4, 100]))) == 0


def test_unmarked_random_audio_yields_about_half():
    rng = np.random.default_rng(0)
    w = rng.integers(-32768, 32768, 20000)
    frac = len(extract_lsb(buf_from_words(w))) / 20000
    assert 0.48 < frac < 0.52


def test_perturbation_is_one_step_per_flipped_lsb(speech):
    buf = speech.buffer
    marks = EpochMarks(speech.pulses, len(buf), buf.sample_rate)
    quantized = buf.with_samples(from_pcm16(to_pcm16(buf.samples)))
    marked = embed_lsb(quantized, marks)
    err = marked.samples - quantized.samples
    assert np.max(np.abs(err)) <= 1 / 32768
    # oracle: every word whose LSB disagrees with the mark moves by exactly one step
    w = to_pcm16(quantized.samples)
    want = np.zeros(len(w), dtype=np.int16)
    want[marks.indices] = 1
    flips = np.count_nonzero((w & 1) != want)
    assert np.sum(err ** 2) == pytest.approx(flips / 32768 ** 2, rel=1e-12)


def test_length_and_rate_checks():
    with pytest.raises(LengthMismatch):
        embed_lsb(buf_from_words([0, 0]), EpochMarks([0], 3, 16000))
    with pytest.raises(RateMismatch):
        embed_lsb(buf_from_words([0, 0]), EpochMarks([0], 2, 8000))


def test_marks_validation():
    with pytest.raises(ValueError):
        EpochMarks([3, 2], 10, 16000)
    with pytest.raises(ValueError):
        EpochMarks([10], 10, 16000)
    assert EpochMarks([0, 10, 30], 40, 16000).mean_interval() == 15.0
    assert EpochMarks([5], 40, 16000).mean_interval() == 0.0


@given(buffers_and_marks())
def test_extract_inverts_embed(bm):
    buf, marks = bm
    assert extract_lsb(embed_lsb(buf, marks)) == marks


@given(buffers_and_marks())
def test_embed_is_idempotent(bm):
    buf, marks = bm
    once = embed_lsb(buf, marks)
    assert np.array_equal(embed_lsb(once, marks).samples, once.samples)


def test_format_by_hand():
    text = format_marks(EpochMarks([10, 20], 100, 16000))
    assert text == "ESOLA-EPOCHS v1 16000 100\n10\n20\n"


@pytest.mark.parametrize("text", [
    "", "ESOLA-EPOCHS v2 16000 100\n", "ESOLA-EPOCHS v1 16000\n",
    "ESOLA-EPOCHS v1 16000 100\n20\n10\n", "ESOLA-EPOCHS v1 16000 100\n5\nx\n",
    "ESOLA-EPOCHS v1 16000 100\n100\n", "ESOLA-EPOCHS v1 0 100\n"])
def test_parse_rejects(text):
    with pytest.raises(MalformedMarksFile):
        parse_marks(text)


@given(st.sets(st.integers(0, 9999)), st.sampled_from([8000, 16000, 48000]))
def test_file_round_trip(tmp_path_factory, idx, rate):
    marks = EpochMarks(sorted(idx), 10000, rate)
    p = tmp_path_factory.mktemp("marks") / "a.epo"
    write_marks_file(marks, p)
    assert read_marks_file(p) == marks


def test_missing_marks_file(tmp_path):
    with pytest.raises(IoFailure):
        read_marks_file(tmp_path / "none.epo")
