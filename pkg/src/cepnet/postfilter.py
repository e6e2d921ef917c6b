"""Wiener postfilter for G.711 quantization noise.

Per 2 ms block: a periodic-Hann analysis frame of the 4 ms just received,
noise variance from the load factor and the codec's signal-to-quantization
noise curve, two-step decision-directed a priori SNR, floored Wiener gain,
and a linear-phase FIR built from the gains that filters the block by
overlap-save. Everything is causal; the algorithmic delay is the FIR
group delay, ``filter_len / 2`` samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import g711
from .audio_io import AudioSignal
from .framing import periodic_hann
from .g711 import G711Law

SAMPLE_RATE = 8000


@dataclass(frozen=True)
class PostfilterConfig:
    frame_len: int = 32       # 4 ms analysis frame
    hop: int = 16             # 2 ms block
    fft_len: int = 64
    filter_len: int = 32
    beta: float = 0.98
    gmin_db: float = -10.0
    law: G711Law = G711Law.A_LAW
    lookahead: int = 0        # samples of analysis lookahead (adds to the delay)

    def __post_init__(self) -> None:
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if self.gmin_db > 0:
            raise ValueError("gain floor must be <= 0 dB")
        if self.filter_len > self.fft_len or self.frame_len > self.fft_len:
            raise ValueError("filter and frame must fit in the FFT")
        if self.hop + self.filter_len - 1 > self.fft_len:
            raise ValueError("overlap-save needs fft_len >= hop + filter_len - 1")
        if not 0 <= self.lookahead <= self.frame_len:
            raise ValueError("lookahead must lie in [0, frame_len]")
        object.__setattr__(self, "law", G711Law.parse(self.law))

    @property
    def g_min(self) -> float:
        return 10.0 ** (self.gmin_db / 20.0)

    @property
    def filter_delay(self) -> int:
        return self.filter_len // 2

    @property
    def delay_samples(self) -> int:
        """Algorithmic delay: FIR group delay plus analysis lookahead."""
        return self.filter_len // 2 + self.lookahead


@dataclass
class PostfilterState:
    """Decision-directed memory plus the latest frame's quantities."""

    prev_s1: np.ndarray | None = None
    prev_noise_var: float | None = None
    signal_var: float = 0.0
    load: float = np.inf
    noise_var: float = 0.0
    gamma: np.ndarray = field(default_factory=lambda: np.zeros(0))
    xi1: np.ndarray = field(default_factory=lambda: np.zeros(0))
    xi2: np.ndarray = field(default_factory=lambda: np.zeros(0))
    g1: np.ndarray = field(default_factory=lambda: np.zeros(0))
    g2: np.ndarray = field(default_factory=lambda: np.zeros(0))


# --- quantization SNR as a function of load factor ------------------------------

SNR_TABLE_LOADS = np.logspace(-0.5, 4.0, 60)


def measure_snr(x: np.ndarray, law: G711Law | str) -> float:
    """Linear SNR of ``x`` after an encode/decode pass (no clipping before)."""
    y = g711.decode(g711.encode(x, law), law)
    noise = np.mean((x - y) ** 2)
    return float(np.mean(x * x) / noise) if noise > 0 else np.inf


def _test_signal(load: float, n: int = 20000) -> np.ndarray:
    """Zero-mean Gaussian with standard deviation 1/load, mirrored for sign symmetry."""
    g = np.random.default_rng(7).standard_normal(n) / load
    return np.concatenate([g, -g])


@lru_cache(maxsize=None)
def snr_table(law: G711Law) -> tuple[np.ndarray, np.ndarray]:
    """(log10 load factors, SNR in dB) measured with Gaussian noise on this codec."""
    snr_db = np.array([10 * np.log10(measure_snr(_test_signal(g), law)) for g in SNR_TABLE_LOADS])
    logs = np.log10(SNR_TABLE_LOADS)
    logs.flags.writeable = False
    snr_db.flags.writeable = False
    return logs, snr_db


def snr_q(load: float, law: G711Law | str) -> float:
    """Linear signal-to-quantization-noise ratio at load factor ``load``.

    Interpolated in dB over log10(load); clamped to the table's ends.
    """
    if not load > 0:
        raise ValueError("load factor must be positive")
    logs, snr_db = snr_table(G711Law.parse(law))
    return float(10.0 ** (np.interp(np.log10(load), logs, snr_db) / 10.0))


def estimate_noise_variance(frame: np.ndarray, cfg: PostfilterConfig = PostfilterConfig()) -> float:
    """Quantization noise variance from the frame's power and the codec curve."""
    x = np.asarray(frame, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty frame")
    var_s = float(np.mean(x * x))
    if var_s == 0.0:
        return 0.0
    return var_s / snr_q(1.0 / np.sqrt(var_s), cfg.law)


def wiener_gains(spectrum: np.ndarray, state: PostfilterState,
                 cfg: PostfilterConfig = PostfilterConfig()) -> np.ndarray:
    """Second-step Wiener gains for one frame; updates ``state`` in place.

    ``state.noise_var`` must hold the current frame's noise variance and
    ``spectrum`` must be scaled so that white noise of that variance has
    expected ``|S(k)|^2`` equal to it (see :func:`analysis_spectrum`).
    """
    S = np.asarray(spectrum)
    noise = state.noise_var
    if noise < 0:
        raise ValueError("noise variance must be non-negative")
    if state.prev_noise_var is None:
        state.prev_noise_var = noise
        state.prev_s1 = np.zeros(S.shape, dtype=np.complex128)
    if noise == 0.0:
        ones = np.ones(S.shape)
        state.gamma = state.xi1 = state.xi2 = np.full(S.shape, np.inf)
        state.g1 = state.g2 = ones
        state.prev_s1 = S.astype(np.complex128)
        state.prev_noise_var = 0.0
        return ones
    gamma = np.abs(S) ** 2 / noise
    prev = state.prev_noise_var
    memory = np.abs(state.prev_s1) ** 2 / prev if prev > 0 else 0.0
    xi1 = cfg.beta * memory + (1.0 - cfg.beta) * np.maximum(gamma - 1.0, 0.0)
    g1 = xi1 / (1.0 + xi1)
    s1 = g1 * S
    xi2 = np.abs(s1) ** 2 / noise
    g2 = np.maximum(xi2 / (1.0 + xi2), cfg.g_min)
    state.gamma, state.xi1, state.xi2, state.g1, state.g2 = gamma, xi1, xi2, g1, g2
    state.prev_s1 = s1
    state.prev_noise_var = noise
    return g2


def analysis_spectrum(frame: np.ndarray, cfg: PostfilterConfig = PostfilterConfig()) -> np.ndarray:
    """Hann-windowed rfft, normalized by the window energy."""
    win = periodic_hann(cfg.frame_len)
    return np.fft.rfft(frame * win, n=cfg.fft_len) / np.sqrt(np.sum(win * win))


def impulse_response(g2: np.ndarray, cfg: PostfilterConfig = PostfilterConfig()) -> np.ndarray:
    """Causal linear-phase FIR (``filter_len`` taps) from real gains on rfft bins."""
    zero_phase = np.fft.irfft(g2, n=cfg.fft_len)
    shifted = np.roll(zero_phase, cfg.filter_len // 2)[:cfg.filter_len]
    return shifted * periodic_hann(cfg.filter_len)


def filter_gains(x: np.ndarray, cfg: PostfilterConfig) -> np.ndarray:
    """Per-block gain vectors, shape (n_blocks, fft_len // 2 + 1).

    Without lookahead and with a FIR delay of ``frame_len / 2`` samples,
    the block's output covers the newest half of its analysis frame.
    """
    H, Nf = cfg.hop, cfg.frame_len
    n_blocks = -(-len(x) // H)
    # block b uses the frame ending ``lookahead`` samples after the block start
    la = cfg.lookahead
    padded = np.concatenate([np.zeros(Nf - la), x, np.zeros(la)])
    state = PostfilterState()
    gains = np.empty((n_blocks, cfg.fft_len // 2 + 1))
    for b in range(n_blocks):
        frame = padded[b * H:b * H + Nf]
        state.signal_var = float(np.mean(frame * frame))
        state.load = 1.0 / np.sqrt(state.signal_var) if state.signal_var > 0 else np.inf
        state.noise_var = estimate_noise_variance(frame, cfg)
        gains[b] = wiener_gains(analysis_spectrum(frame, cfg), state, cfg)
    return gains


def _overlap_save(x: np.ndarray, taps: np.ndarray, cfg: PostfilterConfig) -> np.ndarray:
    H, M, K = cfg.hop, cfg.filter_len, cfg.fft_len
    n_blocks = taps.shape[0]
    padded = np.concatenate([np.zeros(M - 1), x, np.zeros(n_blocks * H - len(x))])
    idx = np.arange(n_blocks)[:, None] * H + np.arange(H + M - 1)[None, :]
    segs = np.fft.rfft(padded[idx], n=K, axis=1)
    resp = np.fft.rfft(taps, n=K, axis=1)
    out = np.fft.irfft(segs * resp, n=K, axis=1)[:, M - 1:M - 1 + H]
    return out.reshape(-1)[:len(x)]


def apply(signal: AudioSignal, cfg: PostfilterConfig = PostfilterConfig(),
          codewords: np.ndarray | None = None, constrain: bool = False,
          align: bool = False) -> AudioSignal:
    """Postfilter G.711-decoded speech.

    The output is delayed by ``cfg.delay_samples`` unless ``align`` is set.
    With ``constrain`` every output sample is clamped into the quantization
    interval of the codeword it corresponds to; ``codewords`` default to
    re-encoding the (decoded) input.
    """
    if signal.sample_rate_hz != SAMPLE_RATE:
        raise ValueError(f"postfilter needs {SAMPLE_RATE} Hz input, got {signal.sample_rate_hz}")
    x = signal.samples
    n = len(x)
    d = cfg.delay_samples
    if n == 0:
        return signal
    fd = cfg.filter_delay
    src = np.concatenate([x, np.zeros(fd)]) if align else x
    gains = filter_gains(src, cfg)
    taps = np.stack([impulse_response(g, cfg) for g in gains])
    y = _overlap_save(src, taps, cfg)
    if align:
        y = y[fd:fd + n]
    else:
        # a sample can only leave once its lookahead has arrived
        y = np.concatenate([np.zeros(cfg.lookahead), y])[:n]
    if constrain:
        codes = g711.encode(x, cfg.law) if codewords is None else np.asarray(codewords, dtype=np.uint8)
        if len(codes) != n:
            raise ValueError("codeword stream length does not match the signal")
        if not align:
            idle = g711.encode(0.0, cfg.law)
            codes = np.concatenate([np.full(d, idle, dtype=np.uint8), codes[:n - d]])
        y = g711.constrain(y, codes, cfg.law)
    return AudioSignal.saturated(y, signal.sample_rate_hz)
