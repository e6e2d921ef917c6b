"""Per-frame cepstral analysis/synthesis: FFT, log10|.|, DCT-II and back."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft


@dataclass(frozen=True)
class CepstralConfig:
    fft_len: int = 512
    log_floor: float = 1e-12
    c0_threshold: float = -1650.0
    c0_offset: float = 1000.0

    def __post_init__(self) -> None:
        if self.fft_len < 16 or self.fft_len & (self.fft_len - 1):
            raise ValueError(f"fft_len must be a power of two >= 16, got {self.fft_len}")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")

    @property
    def env_count(self) -> int:
        """Number of envelope coefficients: the lowest 6.25 % of the cepstrum."""
        return self.fft_len // 16

    @classmethod
    def for_processing_len(cls, processing_len: int, **kwargs) -> "CepstralConfig":
        """FFT length is twice the processing length (e.g. 256 -> 512)."""
        return cls(fft_len=2 * processing_len, **kwargs)


@dataclass(frozen=True)
class CepstralFrame:
    c_env: np.ndarray
    c_res: np.ndarray
    phase: np.ndarray

    @property
    def cepstrum(self) -> np.ndarray:
        return np.concatenate([self.c_env, self.c_res])

    def with_envelope(self, c_env: np.ndarray) -> "CepstralFrame":
        c_env = np.asarray(c_env, dtype=np.float64)
        if c_env.shape != self.c_env.shape:
            raise ValueError(f"envelope shape {c_env.shape} != {self.c_env.shape}")
        return CepstralFrame(c_env, self.c_res, self.phase)


def dct2(x: np.ndarray) -> np.ndarray:
    """Unnormalized DCT-II: ``c[m] = sum_k x[k] cos(pi m (k + 0.5) / K)``.

    Operates on the last axis.
    """
    return scipy.fft.dct(np.asarray(x, dtype=np.float64), type=2, axis=-1) / 2.0


def idct2(c: np.ndarray) -> np.ndarray:
    """Inverse of :func:`dct2`:
    ``x[k] = (c[0] + 2 sum_{m>=1} c[m] cos(pi m (k + 0.5) / K)) / K``.
    """
    return scipy.fft.idct(2.0 * np.asarray(c, dtype=np.float64), type=2, axis=-1)


def log_spectrum(frames: np.ndarray, cfg: CepstralConfig) -> tuple[np.ndarray, np.ndarray]:
    """(log10 magnitude, phase) of the K-point FFT along the last axis."""
    x = np.asarray(frames, dtype=np.float64)
    if x.shape[-1] > cfg.fft_len:
        raise ValueError(f"frame length {x.shape[-1]} exceeds FFT length {cfg.fft_len}")
    if not np.all(np.isfinite(x)):
        raise ValueError("frame contains non-finite values")
    spec = np.fft.fft(x, n=cfg.fft_len, axis=-1)
    return np.log10(np.maximum(np.abs(spec), cfg.log_floor)), np.angle(spec)


def analyze_frames(frames: np.ndarray, cfg: CepstralConfig) -> tuple[np.ndarray, np.ndarray]:
    """Batch analysis: (full cepstra, phases), each shape (n, K)."""
    logmag, phase = log_spectrum(frames, cfg)
    return dct2(logmag), phase


def synthesize_frames(cepstra: np.ndarray, phase: np.ndarray, cfg: CepstralConfig) -> np.ndarray:
    """Batch synthesis back to real frames of length K."""
    mag = 10.0 ** idct2(cepstra)
    return np.fft.ifft(mag * np.exp(1j * phase), axis=-1).real


def analyze_frame(frame: np.ndarray, cfg: CepstralConfig) -> CepstralFrame:
    c, phase = analyze_frames(np.asarray(frame)[None, :], cfg)
    L = cfg.env_count
    return CepstralFrame(c[0, :L], c[0, L:], phase[0])


def synthesize_frame(cf: CepstralFrame, cfg: CepstralConfig) -> np.ndarray:
    c = cf.cepstrum
    if c.shape[0] != cfg.fft_len:
        raise ValueError(f"cepstrum length {c.shape[0]} != FFT length {cfg.fft_len}")
    return synthesize_frames(c[None, :], cf.phase[None, :], cfg)[0]


def c0_floor(c_env: np.ndarray, cfg: CepstralConfig) -> np.ndarray:
    """Push very low 0-th coefficients further down (quieter speech pauses).

    Works on a single envelope vector or a batch (last axis = coefficients).
    """
    out = np.array(c_env, dtype=np.float64, copy=True)
    c0 = out[..., 0]
    out[..., 0] = np.where(c0 < cfg.c0_threshold, c0 - cfg.c0_offset, c0)
    return out
