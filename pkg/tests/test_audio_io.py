import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from esola.audio_io import AudioBuffer, from_pcm16, read_wav, to_pcm16, write_wav
from esola.epoch_marks import EpochMarks, embed_lsb, extract_lsb
from esola.errors import EmptyAudio, IoFailure, MalformedContainer, UnsupportedFormat


def riff(fmt_tag=1, channels=1, rate=16000, bits=16, data=b"", extra=b"", block=None):
    """Hand-assembled WAV bytes."""
    block = block if block is not None else channels * bits // 8
    fmt = struct.pack("<HHIIHH", fmt_tag, channels, rate, rate * block, block, bits)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt + extra
    body += b"data" + struct.pack("<I", len(data)) + data
    return b"RIFF" + struct.pack("<I", len(body)) + body


def words(*values):
    return struct.pack(f"<{len(values)}h", *values)


def test_read_mono_scaling(tmp_path):
    p = tmp_path / "a.wav"
    p.write_bytes(riff(data=words(0, 16384, -32768)))
    buf = read_wav(p)
    assert buf.sample_rate == 16000
    assert buf.samples.tolist() == [0.0, 0.5, -1.0]


def test_read_stereo_is_averaged(tmp_path):
    p = tmp_path / "s.wav"
    p.write_bytes(riff(channels=2, data=words(100, 300)))
    assert read_wav(p).samples.tolist() == [200 / 32768]


def test_float_format_rejected(tmp_path):
    p = tmp_path / "f.wav"
    p.write_bytes(riff(fmt_tag=3, bits=32, data=b"\0" * 8))
    with pytest.raises(UnsupportedFormat):
        read_wav(p)


@pytest.mark.parametrize("kw", [dict(bits=8, data=b"\0\0"), dict(channels=3, data=b"\0" * 6)])
def test_other_layouts_rejected(tmp_path, kw):
    p = tmp_path / "x.wav"
    p.write_bytes(riff(**kw))
    with pytest.raises(UnsupportedFormat):
        read_wav(p)


def test_unknown_chunks_skipped_with_padding(tmp_path):
    # odd-sized LIST chunk is followed by a pad byte
    extra = b"LIST" + struct.pack("<I", 3) + b"abc" + b"\0"
    p = tmp_path / "l.wav"
    p.write_bytes(riff(data=words(1, -1), extra=extra))
    assert read_wav(p).samples.tolist() == [1 / 32768, -1 / 32768]


@pytest.mark.parametrize("blob", [b"", b"RIFX\0\0\0\0WAVE", b"RIFF\4\0\0\0WAVE"])
def test_malformed(tmp_path, blob):
    p = tmp_path / "m.wav"
    p.write_bytes(blob)
    with pytest.raises(MalformedContainer):
        read_wav(p)


def test_truncated_data_chunk(tmp_path):
    p = tmp_path / "t.wav"
    p.write_bytes(riff(data=words(1, 2, 3))[:-2])
    with pytest.raises(MalformedContainer):
        read_wav(p)


def test_odd_data_length(tmp_path):
    p = tmp_path / "o.wav"
    p.write_bytes(riff(data=b"\0\0\0"))
    with pytest.raises(MalformedContainer):
        read_wav(p)


def test_empty_data(tmp_path):
    p = tmp_path / "e.wav"
    p.write_bytes(riff(data=b""))
    with pytest.raises(EmptyAudio):
        read_wav(p)


def test_missing_file(tmp_path):
    with pytest.raises(IoFailure):
        read_wav(tmp_path / "nope.wav")


def test_write_to_missing_dir(tmp_path):
    with pytest.raises(IoFailure):
        write_wav(AudioBuffer([0.1], 16000), tmp_path / "no" / "x.wav")


def test_write_empty_rejected(tmp_path):
    with pytest.raises(EmptyAudio):
        write_wav(AudioBuffer([], 16000), tmp_path / "x.wav")


def test_write_words(tmp_path):
    p = tmp_path / "w.wav"
    write_wav(AudioBuffer([0.0, 0.5], 16000), p)
    blob = p.read_bytes()
    assert blob[-4:] == words(0, 16384)


def test_clamp():
    assert to_pcm16(np.array([1.5, -1.5, 1.0])).tolist() == [32767, -32768, 32767]


def test_all_words_round_trip(tmp_path):
    every = np.arange(-32768, 32768, dtype=np.int16)
    assert np.array_equal(to_pcm16(from_pcm16(every)), every)
    p = tmp_path / "all.wav"
    write_wav(AudioBuffer(from_pcm16(every), 8000), p)
    back = read_wav(p)
    assert back.sample_rate == 8000
    assert np.array_equal(to_pcm16(back.samples), every)


def test_marked_buffer_round_trip_keeps_lsbs(tmp_path, proxy120):
    buf = proxy120.buffer
    marks = EpochMarks(proxy120.pulses, len(buf), buf.sample_rate)
    marked = embed_lsb(buf, marks)
    p = tmp_path / "m.wav"
    write_wav(marked, p)
    back = read_wav(p)
    assert np.array_equal(to_pcm16(back.samples), to_pcm16(marked.samples))
    assert extract_lsb(back) == marks


def test_buffer_validation():
    with pytest.raises(ValueError):
        AudioBuffer([0.0], 0)
    with pytest.raises(ValueError):
        AudioBuffer([np.nan], 16000)
    b = AudioBuffer([0.0] * 8000, 16000)
    assert b.duration == 0.5 and len(b) == 8000


@given(arrays(np.int16, st.integers(1, 400)), st.sampled_from([8000, 16000, 22050, 44100]))
def test_write_read_identity(tmp_path_factory, w, rate):
    p = tmp_path_factory.mktemp("rt") / "x.wav"
    write_wav(AudioBuffer(from_pcm16(w), rate), p)
    back = read_wav(p)
    assert back.sample_rate == rate
    assert np.array_equal(to_pcm16(back.samples), w)
