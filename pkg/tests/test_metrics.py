import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cepnet import metrics
from cepnet.audio_io import AudioSignal
from cepnet.metrics import MetricsConfig


def lsd_oracle(ref, pro, rate, K=512, theta=0.1):
    """Loop-based LSD with an explicit DFT over the 50 Hz to 3.4/7 kHz band."""
    n = int(0.032 * rate)
    hop = n // 2
    w = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / n)
    upper = 3400 if rate == 8000 else 7000
    bins = np.arange(int(K * 50 / rate), int(K * upper / rate) + 1)
    basis = np.exp(-2j * np.pi * np.outer(bins, np.arange(n)) / K)
    total_ms = np.mean(ref ** 2)
    vals = []
    for start in range(0, len(ref) - n + 1, hop):
        a, b = ref[start:start + n], pro[start:start + n]
        if np.mean(a ** 2) / total_ms <= theta:
            continue
        pa = np.abs(basis @ (a * w)) ** 2 + 1e-20
        pb = np.abs(basis @ (b * w)) ** 2 + 1e-20
        vals.append(np.sqrt(np.mean((10 * np.log10(pa / pb)) ** 2)))
    return np.mean(vals)


def test_band_bins():
    cfg = MetricsConfig()
    assert cfg.band(8000) == (3, 217)
    assert cfg.band(16000) == (1, 224)
    assert cfg.frame_len(8000) == 256


def test_identical_signals(speech):
    assert metrics.lsd(speech, speech) == 0.0
    assert metrics.ssdr_seg(speech, speech) == 40.0
    assert metrics.ssdr(speech, speech) == np.inf


def test_double_gain(speech):
    louder = AudioSignal(2 * speech.samples, 8000)
    assert metrics.lsd(speech, louder) == pytest.approx(20 * np.log10(2), abs=1e-9)


def test_sign_flip_per_frame(speech):
    flipped = AudioSignal(-speech.samples, 8000)
    per = metrics.ssdr_per_frame(speech, flipped)
    active = metrics.vad(speech)
    np.testing.assert_allclose(per[active], -10 * np.log10(4), atol=1e-9)


def test_clamps(rng):
    x = AudioSignal(0.1 * rng.standard_normal(4000), 8000)
    loud_noise = AudioSignal.saturated(rng.standard_normal(4000), 8000)
    assert np.all(metrics.ssdr_per_frame(x, loud_noise) >= -10.0)
    assert metrics.ssdr_seg(x, AudioSignal.saturated(-30 * x.samples, 8000)) == -10.0
    tiny = AudioSignal(x.samples * (1 + 1e-6), 8000)
    assert metrics.ssdr_seg(x, tiny) == 40.0
    silent = AudioSignal(np.zeros(4000), 8000)
    assert np.all(metrics.ssdr_per_frame(silent, x) == -10.0)


def test_lsd_matches_loop_oracle(speech, rng):
    noisy = AudioSignal.saturated(speech.samples + 0.003 * rng.standard_normal(len(speech)), 8000)
    assert metrics.lsd(speech, noisy) == pytest.approx(lsd_oracle(speech.samples, noisy.samples, 8000), rel=1e-9)


def test_lsd_wideband_oracle(rng):
    x = AudioSignal(0.1 * rng.standard_normal(16000) * np.repeat(rng.uniform(0, 1, 40), 400), 16000)
    y = AudioSignal.saturated(x.samples + 0.01 * rng.standard_normal(16000), 16000)
    assert metrics.lsd(x, y) == pytest.approx(lsd_oracle(x.samples, y.samples, 16000), rel=1e-9)


def test_vad_counts_complete_frames_only():
    x = np.zeros(8000)
    x[2000:3000] = 0.5
    sig = AudioSignal(x, 8000)
    frames = metrics.frame_matrix(x, 256, 128)
    assert frames.shape == (1 + (8000 - 256) // 128, 256)
    active = metrics.vad(sig)
    for k in active:
        seg = x[k * 128:k * 128 + 256]
        assert np.mean(seg ** 2) / np.mean(x ** 2) > 0.1
    assert active.size > 0


def test_global_ssdr_unclamped(rng):
    x = AudioSignal(0.1 * rng.standard_normal(4000), 8000)
    y = AudioSignal(x.samples * (1 + 1e-4), 8000)
    assert metrics.ssdr(x, y) == pytest.approx(80.0, abs=1e-6)


def test_length_mismatch(speech):
    with pytest.raises(ValueError):
        metrics.lsd(speech, AudioSignal(speech.samples[:-1], 8000))


def test_evaluate_report(speech):
    rep = metrics.evaluate(speech, speech).to_dict()
    assert rep["mean_lsd_db"] == 0.0 and rep["ssdr_seg_db"] == 40.0
    assert rep["active_frame_count"] == metrics.vad(speech).size


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.floats(0.001, 0.5))
def test_metric_ranges(seed, noise):
    r = np.random.default_rng(seed)
    x = AudioSignal.saturated(0.2 * r.standard_normal(3000), 8000)
    y = AudioSignal.saturated(x.samples + noise * r.standard_normal(3000), 8000)
    assert metrics.lsd(x, y) >= 0
    assert -10.0 <= metrics.ssdr_seg(x, y) <= 40.0
