import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from cepnet import cepstral
from cepnet.cepstral import CepstralConfig


def dct_matrix(K):
    m = np.arange(K)[:, None]
    k = np.arange(K)[None, :]
    return np.cos(np.pi * m * (k + 0.5) / K)


@pytest.mark.parametrize("K", [16, 64, 512])
def test_dct_matches_brute_force_matrix(K, rng):
    x = rng.standard_normal((3, K))
    C = dct_matrix(K)
    np.testing.assert_allclose(cepstral.dct2(x), x @ C.T, atol=1e-10)
    c = rng.standard_normal((3, K))
    weights = np.full(K, 2.0)
    weights[0] = 1.0
    np.testing.assert_allclose(cepstral.idct2(c), (c * weights) @ C / K, atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, 64, elements=st.floats(-1e3, 1e3)))
def test_dct_roundtrip(x):
    back = cepstral.idct2(cepstral.dct2(x))
    assert np.max(np.abs(back - x)) <= 1e-10 * max(1.0, np.max(np.abs(x)))


def test_config():
    cfg = CepstralConfig.for_processing_len(256)
    assert cfg.fft_len == 512 and cfg.env_count == 32
    with pytest.raises(ValueError):
        CepstralConfig(fft_len=100)


def test_frame_roundtrip(rng):
    cfg = CepstralConfig(fft_len=512)
    frames = np.zeros((200, 256))
    frames[:, :160] = 0.1 * rng.standard_normal((200, 160))
    c, ph = cepstral.analyze_frames(frames, cfg)
    back = cepstral.synthesize_frames(c, ph, cfg)
    np.testing.assert_allclose(back[:, :256], frames, atol=1e-8)
    np.testing.assert_allclose(back[:, 256:], 0.0, atol=1e-8)


def test_single_frame_api(rng):
    cfg = CepstralConfig(fft_len=64)
    x = rng.standard_normal(32)
    cf = cepstral.analyze_frame(x, cfg)
    assert cf.c_env.shape == (4,) and cf.c_res.shape == (60,) and cf.phase.shape == (64,)
    assert np.all(cf.phase > -np.pi) and np.all(cf.phase <= np.pi)
    np.testing.assert_allclose(cepstral.synthesize_frame(cf, cfg)[:32], x, atol=1e-10)
    with pytest.raises(ValueError):
        cf.with_envelope(np.zeros(5))


def test_synthesis_is_conjugate_symmetric(rng):
    cfg = CepstralConfig(fft_len=128)
    c, ph = cepstral.analyze_frames(rng.standard_normal((20, 64)), cfg)
    spec = 10 ** cepstral.idct2(c) * np.exp(1j * ph)
    assert np.max(np.abs(np.fft.ifft(spec).imag)) < 1e-9


def test_gain_shifts_c0_only(rng):
    cfg = CepstralConfig(fft_len=64)
    x = rng.standard_normal(32)
    a = cepstral.analyze_frame(x, cfg).cepstrum
    b = cepstral.analyze_frame(10 * x, cfg).cepstrum
    assert b[0] - a[0] == pytest.approx(64.0)
    np.testing.assert_allclose(b[1:], a[1:], atol=1e-9)


def test_silent_frame_uses_log_floor():
    cfg = CepstralConfig(fft_len=64)
    cf = cepstral.analyze_frame(np.zeros(32), cfg)
    assert cf.c_env[0] == pytest.approx(-12 * 64)
    np.testing.assert_allclose(cf.cepstrum[1:], 0.0, atol=1e-9)


def test_c0_floor():
    cfg = CepstralConfig()
    env = np.array([[-1700.0, 1.0], [-1600.0, 2.0]])
    out = cepstral.c0_floor(env, cfg)
    np.testing.assert_array_equal(out, [[-2700.0, 1.0], [-1600.0, 2.0]])
    assert env[0, 0] == -1700.0


def test_rejects_bad_frames():
    cfg = CepstralConfig(fft_len=16)
    with pytest.raises(ValueError):
        cepstral.analyze_frames(np.zeros(17), cfg)
    with pytest.raises(ValueError):
        cepstral.analyze_frames(np.array([np.inf] + [0.0] * 15), cfg)
