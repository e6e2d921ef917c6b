import struct
import wave

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cepnet.audio_io import (MAX_SAMPLE, AudioSignal, CorruptWavError, WavFormatError, from_int16,
                             read_wav, to_int16, write_wav)


def test_signal_validation():
    with pytest.raises(ValueError):
        AudioSignal(np.zeros((2, 2)), 8000)
    with pytest.raises(ValueError):
        AudioSignal(np.zeros(4), 44100)
    with pytest.raises(ValueError):
        AudioSignal(np.array([0.0, 1.0]), 8000)
    with pytest.raises(ValueError):
        AudioSignal(np.array([0.0, np.nan]), 8000)
    AudioSignal(np.array([-1.0, MAX_SAMPLE]), 8000)


def test_signal_is_immutable_copy():
    x = np.zeros(4)
    s = AudioSignal(x, 8000)
    x[0] = 0.5
    assert s.samples[0] == 0.0
    with pytest.raises(ValueError):
        s.samples[0] = 0.1


def test_saturated_clamps():
    s = AudioSignal.saturated(np.array([-3.0, 0.2, 1.0, 7.0]), 16000)
    assert s.samples.tolist() == [-1.0, 0.2, MAX_SAMPLE, MAX_SAMPLE]


def test_int16_conversion_rounds_and_saturates():
    x = np.array([0.5 / 32768, -0.5 / 32768, 1.49 / 32768, MAX_SAMPLE, -1.0])
    assert to_int16(x).tolist() == [1, -1, 1, 32767, -32768]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(-32768, 32767), min_size=0, max_size=400), st.sampled_from([8000, 16000]))
def test_wav_roundtrip_is_exact_on_pcm_grid(tmp_path_factory, pcm, rate):
    path = tmp_path_factory.mktemp("wav") / "x.wav"
    sig = AudioSignal(from_int16(np.array(pcm, dtype=np.int16)), rate)
    write_wav(sig, path)
    back = read_wav(path)
    assert back.sample_rate_hz == rate
    np.testing.assert_array_equal(back.samples, sig.samples)


def _write_raw(path, channels=1, width=2, rate=8000, frames=b"\x00\x00" * 10):
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(channels)
        wf.setsampwidth(width)
        wf.setframerate(rate)
        wf.writeframes(frames)


def test_format_errors(tmp_path):
    cases = [dict(channels=2, frames=b"\x00" * 40), dict(width=1, frames=b"\x00" * 10), dict(rate=44100)]
    for k, kw in enumerate(cases):
        p = tmp_path / f"f{k}.wav"
        _write_raw(p, **kw)
        with pytest.raises(WavFormatError):
            read_wav(p)


def test_float_wav_is_format_error(tmp_path):
    p = tmp_path / "float.wav"
    fmt = struct.pack("<HHIIHH", 3, 1, 8000, 32000, 4, 32)
    data = b"\x00" * 16
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt + b"data" + struct.pack("<I", len(data)) + data
    p.write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)
    with pytest.raises(WavFormatError):
        read_wav(p)


def test_corrupt_and_truncated(tmp_path):
    p = tmp_path / "junk.wav"
    p.write_bytes(b"not a wav file at all")
    with pytest.raises(CorruptWavError):
        read_wav(p)
    good = tmp_path / "good.wav"
    write_wav(AudioSignal(np.full(100, 0.1), 8000), good)
    cut = tmp_path / "cut.wav"
    cut.write_bytes(good.read_bytes()[:-50])
    with pytest.raises(CorruptWavError):
        read_wav(cut)
    head = tmp_path / "head.wav"
    head.write_bytes(good.read_bytes()[:20])
    with pytest.raises(CorruptWavError):
        read_wav(head)
